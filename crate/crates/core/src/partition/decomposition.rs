//! Uniform block grid over the domain and its neighbour topology.

use crate::error::{Error, Result};
use crate::math::Vec3;
use alloc::format;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NeighborKind {
    Face,
    Edge,
    Corner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub block: usize,
    pub offset: [i64; 3],
    pub kind: NeighborKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockInfo {
    pub id: usize,
    pub coords: [usize; 3],
    /// First global cell.
    pub origin: [usize; 3],
    pub dims: [usize; 3],
    /// One entry per existing neighbouring direction (at most 26). With
    /// periodic axes of one or two blocks, several directions can name the
    /// same block, including the block itself.
    pub neighbors: Vec<Neighbor>,
}

impl BlockInfo {
    /// Lower and upper corner in cell units.
    pub fn aabb(&self) -> (Vec3, Vec3) {
        let lo = Vec3::new(self.origin[0] as f64, self.origin[1] as f64, self.origin[2] as f64);
        let hi = lo + Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64);
        (lo, hi)
    }

    /// Distinct blocks other than this one that exchange data with it.
    pub fn partners(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.neighbors.iter().map(|n| n.block).filter(|&b| b != self.id).collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    pub fn neighbor_at(&self, offset: [i64; 3]) -> Option<usize> {
        self.neighbors.iter().find(|n| n.offset == offset).map(|n| n.block)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub domain: [usize; 3],
    pub grid: [usize; 3],
    pub periodic: [bool; 3],
    pub blocks: Vec<BlockInfo>,
}

pub fn decompose(domain: [usize; 3], grid: [usize; 3], periodic: [bool; 3]) -> Result<Decomposition> {
    for a in 0..3 {
        if grid[a] == 0 || domain[a] == 0 || domain[a] % grid[a] != 0 {
            return Err(Error::Config(format!(
                "block grid {:?} does not divide the domain {:?}",
                grid, domain
            )));
        }
    }
    let dims: [usize; 3] = core::array::from_fn(|a| domain[a] / grid[a]);
    let mut blocks = Vec::with_capacity(grid[0] * grid[1] * grid[2]);
    for z in 0..grid[2] {
        for y in 0..grid[1] {
            for x in 0..grid[0] {
                let coords = [x, y, z];
                let mut neighbors = Vec::new();
                for dz in -1i64..=1 {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let off = [dx, dy, dz];
                            if off == [0, 0, 0] {
                                continue;
                            }
                            let mut nc = [0usize; 3];
                            let mut exists = true;
                            for a in 0..3 {
                                let c = coords[a] as i64 + off[a];
                                if c < 0 || c >= grid[a] as i64 {
                                    if periodic[a] {
                                        nc[a] = c.rem_euclid(grid[a] as i64) as usize;
                                    } else {
                                        exists = false;
                                    }
                                } else {
                                    nc[a] = c as usize;
                                }
                            }
                            if !exists {
                                continue;
                            }
                            let nonzero = off.iter().filter(|v| **v != 0).count();
                            let kind = match nonzero {
                                1 => NeighborKind::Face,
                                2 => NeighborKind::Edge,
                                _ => NeighborKind::Corner,
                            };
                            neighbors.push(Neighbor {
                                block: (nc[2] * grid[1] + nc[1]) * grid[0] + nc[0],
                                offset: off,
                                kind,
                            });
                        }
                    }
                }
                blocks.push(BlockInfo {
                    id: blocks.len(),
                    coords,
                    origin: core::array::from_fn(|a| coords[a] * dims[a]),
                    dims,
                    neighbors,
                });
            }
        }
    }
    Ok(Decomposition {
        domain,
        grid,
        periodic,
        blocks,
    })
}

impl Decomposition {
    pub fn block_dims(&self) -> [usize; 3] {
        self.blocks[0].dims
    }

    /// Block whose half-open cell box contains `x`; `None` outside the domain.
    pub fn owner_of(&self, x: Vec3) -> Option<usize> {
        let dims = self.block_dims();
        let mut c = [0usize; 3];
        for a in 0..3 {
            let v = x[a];
            if !(v >= 0.0 && v < self.domain[a] as f64) {
                return None;
            }
            c[a] = ((libm::floor(v) as usize) / dims[a]).min(self.grid[a] - 1);
        }
        Some((c[2] * self.grid[1] + c[1]) * self.grid[0] + c[0])
    }

    /// Blocks other than `owner` that the box `[x - h, x + h]` overlaps.
    /// Boxes are not wrapped across periodic faces.
    pub fn overlapping_blocks(&self, x: Vec3, h: f64, owner: usize) -> Vec<usize> {
        let dims = self.block_dims();
        let range: [(usize, usize); 3] = core::array::from_fn(|a| {
            let lo = (x[a] - h).max(0.0);
            let hi = (x[a] + h).min(self.domain[a] as f64 - 1e-9);
            let l = (libm::floor(lo) as usize / dims[a]).min(self.grid[a] - 1);
            let u = (libm::floor(hi.max(0.0)) as usize / dims[a]).min(self.grid[a] - 1);
            (l, u)
        });
        let mut out = Vec::new();
        for z in range[2].0..=range[2].1 {
            for y in range[1].0..=range[1].1 {
                for xx in range[0].0..=range[0].1 {
                    let b = (z * self.grid[1] + y) * self.grid[0] + xx;
                    if b != owner {
                        out.push(b);
                    }
                }
            }
        }
        out
    }
}
