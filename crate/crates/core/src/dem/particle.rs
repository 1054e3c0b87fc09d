use crate::exact::ExactVec3;
use crate::math::Vec3;
use core::f64::consts::PI;

/// A rigid sphere. Positions are in cells, velocities in cells per fluid step.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub x: Vec3,
    pub u: Vec3,
    pub omega: Vec3,
    pub r: f64,
    pub mass: f64,
    pub inertia: f64,
    /// Force and torque of the previous sub-cycle.
    pub f_old: Vec3,
    pub t_old: Vec3,
    /// Accumulators for the current sub-cycle.
    pub f_new: ExactVec3,
    pub t_new: ExactVec3,
    /// Fluid force and torque, refreshed once per fluid step.
    pub f_hyd: Vec3,
    pub t_hyd: Vec3,
    /// Held in place: forces are accumulated but never integrated.
    pub fixed: bool,
    /// Read-only copy of a particle owned by another block.
    pub ghost: bool,
}

impl Particle {
    /// A solid sphere of the given density (fluid density is 1).
    pub fn new(id: u64, x: Vec3, r: f64, density: f64) -> Self {
        let mass = density * sphere_volume(r);
        Particle {
            id,
            x,
            u: Vec3::ZERO,
            omega: Vec3::ZERO,
            r,
            mass,
            inertia: 0.4 * mass * r * r,
            f_old: Vec3::ZERO,
            t_old: Vec3::ZERO,
            f_new: ExactVec3::ZERO,
            t_new: ExactVec3::ZERO,
            f_hyd: Vec3::ZERO,
            t_hyd: Vec3::ZERO,
            fixed: false,
            ghost: false,
        }
    }

    pub fn with_velocity(mut self, u: Vec3) -> Self {
        self.u = u;
        self
    }

    pub fn with_omega(mut self, omega: Vec3) -> Self {
        self.omega = omega;
        self
    }

    pub fn fixed(mut self) -> Self {
        self.fixed = true;
        self
    }

    pub fn volume(&self) -> f64 {
        sphere_volume(self.r)
    }

    /// Velocity of the material point at `p`.
    #[inline]
    pub fn velocity_at(&self, p: Vec3) -> Vec3 {
        self.u + self.omega.cross(p - self.x)
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.u.norm_sq() + 0.5 * self.inertia * self.omega.norm_sq()
    }
}

pub fn sphere_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r * r * r
}
