//! Normal squeeze-film correction for gaps the grid cannot resolve.
//!
//! `F_i = 6π ρ ν λ r_eff² / max(s, s_min) · ((U_j - U_i)·n) n` acts on `i`
//! for gaps `0 < s <= (2/3) r_eff`, with `s_min = 0.01 r_eff`, `λ` the
//! configured scale and `n` pointing from `i` to `j`. The partner receives
//! `-F_i`. Only translational normal motion is corrected; tangential and
//! rotational corrections are zero.

use crate::dem::contact::Wall;
use crate::dem::params::DemParams;
use crate::dem::particle::Particle;
use crate::math::Vec3;
use core::f64::consts::PI;

fn magnitude(params: &DemParams, r_eff: f64, gap: f64) -> Option<f64> {
    if gap <= 0.0 || gap > DemParams::lubrication_cutoff(r_eff) {
        return None;
    }
    let s = gap.max(0.01 * r_eff);
    Some(6.0 * PI * params.rho_f * params.nu * params.lubrication * r_eff * r_eff / s)
}

/// Force on `pi`; the force on `pj` is its negation. `None` outside the
/// lubrication range or in contact.
pub fn lubrication_correction(pi: &Particle, pj: &Particle, params: &DemParams) -> Option<Vec3> {
    let d = pj.x - pi.x;
    let dist = d.norm();
    if dist == 0.0 {
        return None;
    }
    let n = d / dist;
    let r_eff = pi.r * pj.r / (pi.r + pj.r);
    let c = magnitude(params, r_eff, dist - pi.r - pj.r)?;
    Some(n * (c * (pj.u - pi.u).dot(n)))
}

/// Force on `p` near a static wall, using `r_eff = r`.
pub fn wall_lubrication_correction(p: &Particle, wall: &Wall, params: &DemParams) -> Option<Vec3> {
    let c = magnitude(params, p.r, wall.distance(p.x) - p.r)?;
    let n = -wall.normal;
    Some(n * (c * (-p.u).dot(n)))
}
