//! Kernels for particle-resolved fluid–particle simulation.
//!
//! The crate is `no_std` (with `alloc`) and carries everything that is pure
//! computation: the D3Q19 lattice Boltzmann kernel, the discrete element
//! method, the partially saturated cells coupling, the block decomposition
//! with its message-passing step driver, and the analytic performance models.
//! IO, configuration files, wall clocks and threads live in the `psmflow`
//! companion crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dem;
pub mod error;
pub mod exact;
pub mod lbm;
pub mod math;
pub mod partition;
pub mod perf;
pub mod psm;

pub use error::{Error, Result};
pub use math::Vec3;
