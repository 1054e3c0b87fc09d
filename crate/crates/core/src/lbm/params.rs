use crate::error::{Error, Result};
use crate::lbm::lattice::CS2;
use crate::math::Vec3;
use alloc::format;

/// Fluid parameters in lattice units (Δx = Δt = 1). The reference density
/// is fixed at [`RHO0`](crate::lbm::lattice::RHO0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidParams {
    pub tau: f64,
    /// Constant body-force density applied to every fluid cell.
    pub force: Vec3,
}

impl FluidParams {
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau > 0.5) || !tau.is_finite() {
            return Err(Error::Config(format!(
                "relaxation time tau = {tau} must exceed 0.5 (positive viscosity)"
            )));
        }
        Ok(FluidParams {
            tau,
            force: Vec3::ZERO,
        })
    }

    pub fn from_viscosity(nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Config(format!("viscosity {nu} must be positive")));
        }
        Self::from_tau(nu / CS2 + 0.5)
    }

    pub fn with_force(mut self, force: Vec3) -> Self {
        self.force = force;
        self
    }

    pub fn viscosity(&self) -> f64 {
        (self.tau - 0.5) * CS2
    }

    #[inline]
    pub fn omega(&self) -> f64 {
        1.0 / self.tau
    }

    /// Weight `1 - Δt/(2τ)` of the forcing term in the collision. Together
    /// with the half-force shift in the velocity moment it makes the
    /// momentum gained per step exactly `f_ext`.
    #[inline]
    pub fn force_weight(&self) -> f64 {
        1.0 - 0.5 / self.tau
    }
}
