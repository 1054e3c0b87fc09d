//! Linear approximation of the sphere–cell overlap.
//!
//! For a cell whose centre lies a signed distance `D` outside the sphere
//! surface, the covered fraction is approximated by `ε = f(r) - D` clamped
//! to `[0, 1]`. The offset `f(r) = V_a - r + 1/2` comes from the exact
//! overlap of a cell aligned with the surface normal, where
//! `V_a = ∫∫ sqrt(r² - x² - y²)` over the centred unit square.

use crate::error::{Error, Result};
use crate::math::Vec3;
use alloc::format;
use libm::{atan, sqrt};

/// Smallest radius for which the closed form is defined.
pub const MIN_RADIUS: f64 = core::f64::consts::FRAC_1_SQRT_2;

pub fn v_a(r: f64) -> Result<f64> {
    if !(r >= MIN_RADIUS) || !r.is_finite() {
        return Err(Error::Config(format!("particle radius {r} below the mapping limit {MIN_RADIUS:.4}")));
    }
    let r2 = r * r;
    let s = sqrt(r2 - 0.5);
    Ok((1.0 / 12.0 - r2) * atan(0.5 * s / (0.5 - r2)) + s / 3.0 + (r2 - 1.0 / 12.0) * atan(0.5 / s)
        - 4.0 / 3.0 * r2 * r * atan(0.25 / (r * s)))
}

pub fn f_of_r(r: f64) -> Result<f64> {
    Ok(v_a(r)? - r + 0.5)
}

/// Covered fraction of the unit cell centred at `cell_center`.
#[inline]
pub fn overlap_fraction(cell_center: Vec3, x_p: Vec3, r: f64, f_r: f64) -> f64 {
    let d = (cell_center - x_p).norm() - r;
    (f_r - d).clamp(0.0, 1.0)
}
