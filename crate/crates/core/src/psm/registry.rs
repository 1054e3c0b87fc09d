//! Which particles can touch which part of a block.

use crate::dem::particle::Particle;
use crate::error::Result;
use crate::math::Vec3;
use crate::psm::mapping::f_of_r;
use alloc::vec;
use alloc::vec::Vec;

/// The particle data the fluid kernels need, copied once per fluid step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleSnapshot {
    pub id: u64,
    pub x: Vec3,
    pub r: f64,
    pub f_r: f64,
    pub u: Vec3,
    pub omega: Vec3,
}

impl ParticleSnapshot {
    pub fn of(p: &Particle) -> Result<Self> {
        Ok(ParticleSnapshot {
            id: p.id,
            x: p.x,
            r: p.r,
            f_r: f_of_r(p.r)?,
            u: p.u,
            omega: p.omega,
        })
    }

    /// Radius beyond which no cell centre receives a fraction.
    pub fn reach(&self) -> f64 {
        self.r + self.f_r
    }
}

/// A block split into `k` sub-blocks per axis, each listing the snapshots
/// whose mapping reach overlaps the cell centres it contains.
#[derive(Clone, Debug)]
pub struct SubBlockRegistry {
    pub origin: [usize; 3],
    pub dims: [usize; 3],
    pub k: [usize; 3],
    pub snapshots: Vec<ParticleSnapshot>,
    /// Snapshot indices per sub-block, x fastest.
    pub lists: Vec<Vec<u32>>,
}

impl SubBlockRegistry {
    /// `k` is capped per axis at the block extent.
    pub fn build(origin: [usize; 3], dims: [usize; 3], k: usize, particles: &[Particle]) -> Result<Self> {
        let k = dims.map(|d| k.clamp(1, d.max(1)));
        let mut snapshots = Vec::with_capacity(particles.len());
        for p in particles {
            snapshots.push(ParticleSnapshot::of(p)?);
        }
        snapshots.sort_by_key(|s| s.id);
        let mut reg = SubBlockRegistry {
            origin,
            dims,
            k,
            snapshots,
            lists: vec![Vec::new(); k[0] * k[1] * k[2]],
        };
        for (i, s) in reg.snapshots.iter().enumerate() {
            let lo = s.x - Vec3::splat(s.reach());
            let hi = s.x + Vec3::splat(s.reach());
            let range: [(usize, usize); 3] = core::array::from_fn(|a| {
                // sub-blocks whose cell-centre span [c0 + 0.5, c1 - 0.5] meets [lo, hi]
                let mut first = usize::MAX;
                let mut last = 0;
                for b in 0..k[a] {
                    let (c0, c1) = reg.sub_range(a, b);
                    let span_lo = (origin[a] + c0) as f64 + 0.5;
                    let span_hi = (origin[a] + c1) as f64 - 0.5;
                    if span_hi >= lo[a] && span_lo <= hi[a] {
                        first = first.min(b);
                        last = b;
                    }
                }
                (first, last)
            });
            if range.iter().any(|r| r.0 == usize::MAX) {
                continue;
            }
            for bz in range[2].0..=range[2].1 {
                for by in range[1].0..=range[1].1 {
                    for bx in range[0].0..=range[0].1 {
                        let idx = (bz * k[1] + by) * k[0] + bx;
                        reg.lists[idx].push(i as u32);
                    }
                }
            }
        }
        Ok(reg)
    }

    /// Local cell range `[start, end)` of sub-block `b` along `axis`.
    pub fn sub_range(&self, axis: usize, b: usize) -> (usize, usize) {
        let n = self.dims[axis];
        let k = self.k[axis];
        (b * n / k, (b + 1) * n / k)
    }

    pub fn sub_blocks(&self) -> impl Iterator<Item = ([usize; 3], &[u32])> + '_ {
        let k = self.k;
        (0..k[2]).flat_map(move |bz| {
            (0..k[1]).flat_map(move |by| {
                (0..k[0]).map(move |bx| {
                    let idx = (bz * k[1] + by) * k[0] + bx;
                    ([bx, by, bz], self.lists[idx].as_slice())
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psm::mapping::overlap_fraction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_sub_block_misses_an_overlapping_particle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ps: Vec<Particle> = (0..20)
            .map(|i| {
                Particle::new(
                    i,
                    Vec3::new(rng.gen_range(-5.0..45.0), rng.gen_range(-5.0..35.0), rng.gen_range(10.0..50.0)),
                    rng.gen_range(2.0..6.0),
                    1.0,
                )
            })
            .collect();
        let origin = [0, 0, 20];
        let dims = [40, 30, 20];
        let reg = SubBlockRegistry::build(origin, dims, 8, &ps).unwrap();
        for (b, list) in reg.sub_blocks() {
            let ranges: [(usize, usize); 3] = core::array::from_fn(|a| reg.sub_range(a, b[a]));
            for z in ranges[2].0..ranges[2].1 {
                for y in ranges[1].0..ranges[1].1 {
                    for x in ranges[0].0..ranges[0].1 {
                        let c = Vec3::new(x as f64 + 0.5, y as f64 + 0.5, (z + origin[2]) as f64 + 0.5);
                        for (i, s) in reg.snapshots.iter().enumerate() {
                            if overlap_fraction(c, s.x, s.r, s.f_r) > 0.0 {
                                assert!(list.contains(&(i as u32)));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sub_ranges_tile_the_block() {
        let reg = SubBlockRegistry::build([0; 3], [13, 5, 3], 8, &[]).unwrap();
        assert_eq!(reg.k, [8, 5, 3]);
        let mut covered = 0;
        for b in 0..8 {
            let (a, e) = reg.sub_range(0, b);
            covered += e - a;
        }
        assert_eq!(covered, 13);
    }
}
