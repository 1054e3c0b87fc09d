//! Sparse per-cell solid volume fractions.

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::psm::mapping::overlap_fraction;
use crate::psm::registry::SubBlockRegistry;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

const NONE: u32 = u32::MAX;

/// Up to two overlapping particles of one cell, sorted by id.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellFractions {
    pub n: u8,
    /// Index into the registry snapshots.
    pub slot: [u32; 2],
    pub id: [u64; 2],
    pub b: [f64; 2],
    /// `min(1, Σ B_i)`.
    pub total: f64,
}

/// Fractions of the covered cells of a block. Uncovered cells store nothing.
#[derive(Clone, Debug)]
pub struct FractionField {
    pub dims: [usize; 3],
    index: Vec<u32>,
    /// Covered cells in lexicographic order with their interior index.
    pub cells: Vec<(u32, CellFractions)>,
}

impl FractionField {
    pub fn empty(dims: [usize; 3]) -> Self {
        FractionField {
            dims,
            index: vec![NONE; dims[0] * dims[1] * dims[2]],
            cells: Vec::new(),
        }
    }

    #[inline]
    fn cell_index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    /// Position of the cell in [`FractionField::cells`], if covered.
    #[inline]
    pub fn entry_index(&self, x: usize, y: usize, z: usize) -> Option<usize> {
        let i = self.index[self.cell_index(x, y, z)];
        (i != NONE).then_some(i as usize)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> Option<&CellFractions> {
        self.entry_index(x, y, z).map(|i| &self.cells[i].1)
    }

    /// Clamped total fraction of a cell.
    pub fn total(&self, x: usize, y: usize, z: usize) -> f64 {
        self.get(x, y, z).map_or(0.0, |c| c.total)
    }

    /// `Σ_cells B_i` per registry slot.
    pub fn volume_per_slot(&self, slots: usize) -> Vec<f64> {
        let mut v = vec![0.0; slots];
        for (_, c) in &self.cells {
            for k in 0..c.n as usize {
                v[c.slot[k] as usize] += c.b[k];
            }
        }
        v
    }
}

/// Map every registered particle onto the cells of the block.
pub fn build_fraction_field(reg: &SubBlockRegistry) -> Result<FractionField> {
    let dims = reg.dims;
    let mut raw: Vec<(u32, u64, u32, f64)> = Vec::new();
    for (b, list) in reg.sub_blocks() {
        let ranges: [(usize, usize); 3] = core::array::from_fn(|a| reg.sub_range(a, b[a]));
        for &slot in list {
            let s = &reg.snapshots[slot as usize];
            // cells whose centre lies within the reach along each axis
            let lim: [(usize, usize); 3] = core::array::from_fn(|a| {
                let lo = s.x[a] - s.reach() - 0.5 - reg.origin[a] as f64;
                let hi = s.x[a] + s.reach() - 0.5 - reg.origin[a] as f64;
                let lo = libm::ceil(lo).max(ranges[a].0 as f64) as usize;
                let hi = (libm::floor(hi) + 1.0).min(ranges[a].1 as f64).max(0.0) as usize;
                (lo, hi.max(lo))
            });
            for z in lim[2].0..lim[2].1 {
                for y in lim[1].0..lim[1].1 {
                    for x in lim[0].0..lim[0].1 {
                        let c = Vec3::new(
                            (reg.origin[0] + x) as f64 + 0.5,
                            (reg.origin[1] + y) as f64 + 0.5,
                            (reg.origin[2] + z) as f64 + 0.5,
                        );
                        let eps = overlap_fraction(c, s.x, s.r, s.f_r);
                        if eps > 0.0 {
                            let ci = (z * dims[1] + y) * dims[0] + x;
                            raw.push((ci as u32, s.id, slot, eps));
                        }
                    }
                }
            }
        }
    }
    raw.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut field = FractionField::empty(dims);
    let mut i = 0;
    while i < raw.len() {
        let cell = raw[i].0;
        let mut j = i;
        while j < raw.len() && raw[j].0 == cell {
            j += 1;
        }
        if j - i > 2 {
            let ci = cell as usize;
            let (x, y, z) = (ci % dims[0], (ci / dims[0]) % dims[1], ci / (dims[0] * dims[1]));
            return Err(Error::TooManyOverlaps {
                cell: [
                    (reg.origin[0] + x) as i64,
                    (reg.origin[1] + y) as i64,
                    (reg.origin[2] + z) as i64,
                ],
                ids: [raw[i].1, raw[i + 1].1, raw[i + 2].1],
            });
        }
        let mut cf = CellFractions {
            n: (j - i) as u8,
            slot: [0; 2],
            id: [0; 2],
            b: [0.0; 2],
            total: 0.0,
        };
        let mut sum = 0.0;
        for k in 0..j - i {
            cf.slot[k] = raw[i + k].2;
            cf.id[k] = raw[i + k].1;
            cf.b[k] = raw[i + k].3;
            sum += raw[i + k].3;
        }
        cf.total = sum.min(1.0);
        field.index[cell as usize] = field.cells.len() as u32;
        field.cells.push((cell, cf));
        i = j;
    }
    Ok(field)
}

/// Particle velocity at the centre of every covered cell, per entry.
#[derive(Clone, Debug, Default)]
pub struct SolidVelocityField {
    pub velocities: Vec<[Vec3; 2]>,
}

pub fn set_solid_velocities(field: &FractionField, reg: &SubBlockRegistry) -> Result<SolidVelocityField> {
    let dims = field.dims;
    let mut velocities = Vec::with_capacity(field.cells.len());
    for (cell, cf) in &field.cells {
        let ci = *cell as usize;
        let local = [ci % dims[0], (ci / dims[0]) % dims[1], ci / (dims[0] * dims[1])];
        let c = Vec3::new(
            (reg.origin[0] + local[0]) as f64 + 0.5,
            (reg.origin[1] + local[1]) as f64 + 0.5,
            (reg.origin[2] + local[2]) as f64 + 0.5,
        );
        let mut v = [Vec3::ZERO; 2];
        for k in 0..cf.n as usize {
            let s = reg.snapshots.get(cf.slot[k] as usize).filter(|s| s.id == cf.id[k]).ok_or_else(|| {
                Error::Sync(format!("fraction entry references unknown particle {}", cf.id[k]))
            })?;
            v[k] = s.u + s.omega.cross(c - s.x);
        }
        velocities.push(v);
    }
    Ok(SolidVelocityField { velocities })
}
