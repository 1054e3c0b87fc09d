//! Discrete element method for spheres: linear spring-dashpot contacts with
//! tangential history, a normal lubrication correction, linked-cell pair
//! search and a Velocity Verlet integrator.

pub mod contact;
pub mod integrate;
pub mod linked_cells;
pub mod lubrication;
pub mod params;
pub mod particle;
pub mod system;

pub use contact::{
    compute_interactions, contact_force, wall_contact_force, ContactHistory, ContactResult, HistoryEntry, Partner,
    Wall,
};
pub use integrate::{apply_external_forces, integrate_post_force, integrate_pre_force};
pub use linked_cells::LinkedCells;
pub use lubrication::{lubrication_correction, wall_lubrication_correction};
pub use params::DemParams;
pub use particle::Particle;
pub use system::DemSystem;
