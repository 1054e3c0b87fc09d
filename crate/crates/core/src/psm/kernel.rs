//! Fused PSM collision, pull streaming and hydrodynamic force accumulation.

use crate::exact::ExactVec3;
use crate::lbm::field::{PdfField, Region};
use crate::lbm::kernel::{collide_cell, equilibrium, forcing_term, macroscopic, srt_collision_term, KernelStats};
use crate::lbm::lattice::{CX, CY, CZ, OPPOSITE, Q};
use crate::lbm::params::FluidParams;
use crate::math::Vec3;
use crate::psm::fraction::{FractionField, SolidVelocityField};
use crate::psm::registry::SubBlockRegistry;
use alloc::vec;
use alloc::vec::Vec;

/// `C^solid_q = [f_q̄ - f^eq_q̄(ρ, U_f)] - [f_q - f^eq_q(ρ, U_p)]`.
#[inline]
pub fn solid_collision_term(f: &[f64; Q], feq_fluid: &[f64; Q], feq_solid: &[f64; Q]) -> [f64; Q] {
    core::array::from_fn(|q| {
        let qb = OPPOSITE[q];
        (f[qb] - feq_fluid[qb]) - (f[q] - feq_solid[q])
    })
}

/// Per-snapshot force and torque sums of one block.
#[derive(Clone, Debug)]
pub struct HydroAccumulator {
    pub force: Vec<ExactVec3>,
    pub torque: Vec<ExactVec3>,
}

impl HydroAccumulator {
    pub fn new(slots: usize) -> Self {
        HydroAccumulator {
            force: vec![ExactVec3::ZERO; slots],
            torque: vec![ExactVec3::ZERO; slots],
        }
    }
}

/// One sweep over `region`: reads `src`, writes `dst`. Uncovered cells take
/// exactly the plain lattice Boltzmann path.
pub fn psm_collide_stream(
    field: &mut PdfField,
    params: &FluidParams,
    fractions: &FractionField,
    solid: &SolidVelocityField,
    registry: &SubBlockRegistry,
    acc: &mut HydroAccumulator,
    region: Region,
) -> KernelStats {
    let layout = field.layout;
    let n = field.stride();
    let off = layout.offsets();
    let origin = registry.origin;
    let (src, dst) = (&field.src, &mut field.dst);
    let mut stats = KernelStats::default();
    let has_force = params.force != Vec3::ZERO;
    layout.for_each_cell(region, |x, y, z| {
        let c = layout.index(x as i64, y as i64, z as i64);
        let f: [f64; Q] = core::array::from_fn(|q| src[q * n + (c as isize - off[q]) as usize]);
        let out = match fractions.entry_index(x, y, z) {
            None => {
                let (out, rho, u) = collide_cell(&f, params);
                stats.record([x as i64, y as i64, z as i64], rho, u);
                out
            }
            Some(e) => {
                let cf = &fractions.cells[e].1;
                let (rho, u) = macroscopic(&f, params.force);
                stats.record([x as i64, y as i64, z as i64], rho, u);
                let srt = srt_collision_term(&f, rho, u, params);
                let feq_f = equilibrium(rho, u);
                let fluid = 1.0 - cf.total;
                let mut out: [f64; Q] = core::array::from_fn(|q| f[q] + fluid * srt[q]);
                let centre = Vec3::new(
                    (origin[0] + x) as f64 + 0.5,
                    (origin[1] + y) as f64 + 0.5,
                    (origin[2] + z) as f64 + 0.5,
                );
                for k in 0..cf.n as usize {
                    let feq_s = equilibrium(rho, solid.velocities[e][k]);
                    let cs = solid_collision_term(&f, &feq_f, &feq_s);
                    let b = cf.b[k];
                    let mut m = Vec3::ZERO;
                    for q in 0..Q {
                        out[q] += b * cs[q];
                        // c_q̄ = -c_q
                        m.x -= cs[q] * CX[q] as f64;
                        m.y -= cs[q] * CY[q] as f64;
                        m.z -= cs[q] * CZ[q] as f64;
                    }
                    let slot = cf.slot[k] as usize;
                    let df = m * b;
                    acc.force[slot].accumulate(df);
                    acc.torque[slot].accumulate((centre - registry.snapshots[slot].x).cross(df));
                }
                if has_force {
                    let fq = forcing_term(u, params.force);
                    let w = fluid * params.force_weight();
                    for q in 0..Q {
                        out[q] += w * fq[q];
                    }
                }
                out
            }
        };
        for q in 0..Q {
            dst[q * n + c] = out[q];
        }
    });
    stats
}

/// Per-particle partials `(id, force, torque)` of one block, id-ordered,
/// skipping particles that touched no cell.
pub fn finalize_hydro_forces(acc: &HydroAccumulator, registry: &SubBlockRegistry) -> Vec<(u64, ExactVec3, ExactVec3)> {
    registry
        .snapshots
        .iter()
        .enumerate()
        .filter(|(i, _)| !(acc.force[*i].is_zero() && acc.torque[*i].is_zero()))
        .map(|(i, s)| (s.id, acc.force[i], acc.torque[i]))
        .collect()
}
