//! D3Q19 single-relaxation-time lattice Boltzmann kernel.

pub mod boundary;
pub mod field;
pub mod kernel;
pub mod lattice;
pub mod params;

pub use boundary::{apply_boundaries, BoundarySpec, Face, FaceCondition};
pub use field::{GridLayout, PdfField, Region};
pub use kernel::{
    collide_cell, equilibrium, forcing_term, lbm_collide_stream, macroscopic, srt_collision_term,
    stream, KernelStats,
};
pub use lattice::{LatticeModel, CX, CY, CZ, OPPOSITE, Q, WEIGHTS};
pub use params::FluidParams;
