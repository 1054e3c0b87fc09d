//! Block decomposition and the bulk-synchronous step driver.

pub mod decomposition;
pub mod message;
pub mod simulation;
pub mod worker;

pub use decomposition::{decompose, BlockInfo, Decomposition, Neighbor, NeighborKind};
pub use message::{Envelope, ParticleTransfer, Payload, PARTICLE_BYTES};
pub use simulation::{comm_volume_report, ghost_margin, BlockComm, CommReport, Executor, Sequential, Simulation, SimulationSetup};
pub use worker::{step_phases, BlockWorker, Phase, Traffic, WorkerConfig};
