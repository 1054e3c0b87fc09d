//! Conversion of dimensionless settling parameters to lattice units.
//!
//! With the diameter `D` in cells and the lattice viscosity `ν` chosen, the
//! Galileo number `Ga = sqrt((ρ_p/ρ_f - 1) g D³) / ν` fixes the lattice
//! gravity and the particle Reynolds number `Re_p = U D / ν` fixes the
//! superficial inflow speed. Both groups are honoured exactly; the physical
//! gravity only sets how a lattice step maps to seconds.

use crate::error::{SimError, SimResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeUnits {
    pub nu: f64,
    pub gravity: f64,
    pub inflow: f64,
}

pub fn from_dimensionless(galileo: f64, reynolds: f64, density_ratio: f64, diameter: f64, nu: f64) -> SimResult<LatticeUnits> {
    let mut bad = Vec::new();
    if !(galileo > 0.0) {
        bad.push(format!("galileo = {galileo} must be positive"));
    }
    if !(reynolds >= 0.0) {
        bad.push(format!("reynolds = {reynolds} must not be negative"));
    }
    if !(density_ratio > 1.0) {
        bad.push(format!("density_ratio = {density_ratio} must exceed 1 for a settling particle"));
    }
    if !(diameter > 0.0 && nu > 0.0) {
        bad.push(format!("diameter {diameter} and viscosity {nu} must be positive"));
    }
    if !bad.is_empty() {
        return Err(SimError::Config(bad));
    }
    let gn = galileo * nu;
    Ok(LatticeUnits {
        nu,
        gravity: gn * gn / ((density_ratio - 1.0) * diameter.powi(3)),
        inflow: reynolds * nu / diameter,
    })
}

/// Seconds per lattice step when the lattice gravity stands for `g_phys`
/// and a cell for `dx` metres.
pub fn seconds_per_step(gravity_lattice: f64, g_phys: f64, dx: f64) -> f64 {
    (gravity_lattice * dx / g_phys).sqrt()
}

pub fn galileo(gravity: f64, density_ratio: f64, diameter: f64, nu: f64) -> f64 {
    ((density_ratio - 1.0) * gravity * diameter.powi(3)).sqrt() / nu
}
