//! Uniform bucket grid for near-pair search.

use crate::dem::particle::Particle;
use crate::error::{Error, Result};
use crate::math::Vec3;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct LinkedCells {
    lo: Vec3,
    edge: f64,
    dims: [usize; 3],
    /// Bucket `c` holds `items[start[c]..start[c + 1]]`.
    start: Vec<u32>,
    items: Vec<u32>,
}

/// The 13 neighbour offsets of a half shell; with the own bucket they visit
/// every adjacent bucket pair once.
const HALF_SHELL: [[i64; 3]; 13] = [
    [1, 0, 0],
    [-1, 1, 0],
    [0, 1, 0],
    [1, 1, 0],
    [-1, -1, 1],
    [0, -1, 1],
    [1, -1, 1],
    [-1, 0, 1],
    [0, 0, 1],
    [1, 0, 1],
    [-1, 1, 1],
    [0, 1, 1],
    [1, 1, 1],
];

impl LinkedCells {
    /// Bucket edge so that every interacting pair shares or neighbours a
    /// bucket: at least 1.01 diameters and at least the contact plus
    /// lubrication range.
    pub fn edge_for(d_max: f64, gap_max: f64) -> f64 {
        (1.01 * d_max).max(d_max + gap_max)
    }

    /// Bucket the particles over the box `[lo, hi]`.
    pub fn build(particles: &[Particle], lo: Vec3, hi: Vec3, edge: f64) -> Result<Self> {
        assert!(edge > 0.0);
        let ext = hi - lo;
        let dims = [ext.x, ext.y, ext.z].map(|e| (libm::floor(e.max(0.0) / edge) as usize).max(1));
        let ncell = dims[0] * dims[1] * dims[2];
        let mut cell_of = Vec::with_capacity(particles.len());
        for p in particles {
            let rel = p.x - lo;
            let inside = p.x.is_finite()
                && p.x.x >= lo.x
                && p.x.y >= lo.y
                && p.x.z >= lo.z
                && p.x.x <= hi.x
                && p.x.y <= hi.y
                && p.x.z <= hi.z;
            if !inside {
                return Err(Error::OutsideGrid {
                    id: p.id,
                    position: p.x.to_array(),
                });
            }
            let c = [rel.x, rel.y, rel.z];
            let idx: [usize; 3] = core::array::from_fn(|a| ((libm::floor(c[a] / edge)) as usize).min(dims[a] - 1));
            cell_of.push((idx[2] * dims[1] + idx[1]) * dims[0] + idx[0]);
        }
        let mut start = vec![0u32; ncell + 1];
        for &c in &cell_of {
            start[c + 1] += 1;
        }
        for c in 0..ncell {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut items = vec![0u32; particles.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Ok(LinkedCells { lo, edge, dims, start, items })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn origin(&self) -> Vec3 {
        self.lo
    }

    fn bucket(&self, c: usize) -> &[u32] {
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }

    /// Visit every pair of particle indices sharing or neighbouring a bucket,
    /// each exactly once.
    pub fn for_each_pair(&self, mut f: impl FnMut(usize, usize)) {
        let [nx, ny, nz] = self.dims;
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let c = (z * ny + y) * nx + x;
                    let own = self.bucket(c);
                    for (k, &a) in own.iter().enumerate() {
                        for &b in &own[k + 1..] {
                            f(a as usize, b as usize);
                        }
                    }
                    for o in HALF_SHELL {
                        let (xx, yy, zz) = (x as i64 + o[0], y as i64 + o[1], z as i64 + o[2]);
                        if xx < 0 || yy < 0 || zz < 0 || xx >= nx as i64 || yy >= ny as i64 || zz >= nz as i64 {
                            continue;
                        }
                        let other = self.bucket((zz as usize * ny + yy as usize) * nx + xx as usize);
                        for &a in own {
                            for &b in other {
                                f(a as usize, b as usize);
                            }
                        }
                    }
                }
            }
        }
    }
}
