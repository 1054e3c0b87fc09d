//! Partially saturated cells coupling between the fluid and the particles.
//!
//! Each step the particles are mapped onto the grid as per-cell solid volume
//! fractions, the fused kernel blends the fluid collision with a solid
//! collision towards the local particle velocity, and the momentum taken up
//! by the solid operator is summed into per-particle hydrodynamic forces.

pub mod fraction;
pub mod kernel;
pub mod mapping;
pub mod registry;

pub use fraction::{build_fraction_field, set_solid_velocities, CellFractions, FractionField, SolidVelocityField};
pub use kernel::{finalize_hydro_forces, psm_collide_stream, solid_collision_term, HydroAccumulator};
pub use mapping::{f_of_r, overlap_fraction, v_a};
pub use registry::{ParticleSnapshot, SubBlockRegistry};
