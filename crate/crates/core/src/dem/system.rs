//! A self-contained particle system without fluid, used for bed
//! preparation and for testing the contact model in isolation.

use crate::dem::contact::{compute_interactions, ContactHistory, Wall};
use crate::dem::integrate::{apply_external_forces, integrate_post_force, integrate_pre_force};
use crate::dem::linked_cells::LinkedCells;
use crate::dem::params::DemParams;
use crate::dem::particle::Particle;
use crate::error::Result;
use crate::math::Vec3;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct DemSystem {
    pub particles: Vec<Particle>,
    pub walls: Vec<Wall>,
    pub params: DemParams,
    pub history: ContactHistory,
    /// Box the particles must stay in, used to size the pair search.
    pub lo: Vec3,
    pub hi: Vec3,
    pub cycle: u64,
}

impl DemSystem {
    pub fn new(particles: Vec<Particle>, walls: Vec<Wall>, params: DemParams, lo: Vec3, hi: Vec3) -> Result<Self> {
        params.validate()?;
        Ok(DemSystem {
            particles,
            walls,
            params,
            history: ContactHistory::default(),
            lo,
            hi,
            cycle: 0,
        })
    }

    fn search_edge(&self) -> f64 {
        let d_max = self.particles.iter().map(|p| 2.0 * p.r).fold(0.0, f64::max);
        let gap = if self.params.lubrication > 0.0 {
            DemParams::lubrication_cutoff(0.5 * d_max)
        } else {
            0.0
        };
        LinkedCells::edge_for(d_max.max(1e-9), gap)
    }

    /// One particle time step of length `params.dt()`.
    pub fn substep(&mut self) -> Result<()> {
        let dt = self.params.dt();
        integrate_pre_force(&mut self.particles, dt);
        let cells = LinkedCells::build(&self.particles, self.lo, self.hi, self.search_edge())?;
        compute_interactions(&mut self.particles, &self.walls, &self.params, &cells, &mut self.history, self.cycle)?;
        apply_external_forces(&mut self.particles, &self.params);
        integrate_post_force(&mut self.particles, dt);
        self.history.swap();
        self.cycle += 1;
        Ok(())
    }

    /// Evaluate forces at the current positions without moving, so the first
    /// Verlet step starts from a consistent `F_old`.
    pub fn prime(&mut self) -> Result<()> {
        let cells = LinkedCells::build(&self.particles, self.lo, self.hi, self.search_edge())?;
        let mut scratch = self.history.clone();
        compute_interactions(&mut self.particles, &self.walls, &self.params, &cells, &mut scratch, self.cycle)?;
        apply_external_forces(&mut self.particles, &self.params);
        integrate_post_force(&mut self.particles, 0.0);
        Ok(())
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles.iter().map(Particle::kinetic_energy).sum()
    }
}
