//! Velocity Verlet split into the position update before the force
//! evaluation and the velocity update after it.

use crate::dem::params::DemParams;
use crate::dem::particle::Particle;
use crate::exact::ExactVec3;

/// `x += dt U + dt²/(2m) F_old`. Spheres carry no orientation.
pub fn integrate_pre_force(particles: &mut [Particle], dt: f64) {
    for p in particles.iter_mut().filter(|p| !p.fixed && !p.ghost) {
        p.x = p.x + p.u * dt + p.f_old * (dt * dt / (2.0 * p.mass));
    }
}

/// `U += dt/(2m)(F_old + F_new)`, likewise for Ω; then the new force becomes
/// the old one and the accumulators are cleared.
pub fn integrate_post_force(particles: &mut [Particle], dt: f64) {
    for p in particles.iter_mut().filter(|p| !p.ghost) {
        let f = p.f_new.value();
        let t = p.t_new.value();
        if !p.fixed {
            p.u = p.u + (p.f_old + f) * (dt / (2.0 * p.mass));
            p.omega = p.omega + (p.t_old + t) * (dt / (2.0 * p.inertia));
        }
        p.f_old = f;
        p.t_old = t;
        p.f_new = ExactVec3::ZERO;
        p.t_new = ExactVec3::ZERO;
    }
}

/// Add buoyancy-reduced gravity `(m - ρ_f V) g` and the held fluid force.
pub fn apply_external_forces(particles: &mut [Particle], params: &DemParams) {
    for p in particles.iter_mut().filter(|p| !p.ghost) {
        let w = params.gravity * (p.mass - params.rho_f * p.volume());
        p.f_new.accumulate(w);
        p.f_new.accumulate(p.f_hyd);
        p.t_new.accumulate(p.t_hyd);
    }
}
