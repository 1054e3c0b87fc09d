//! Scenario setup, unit conversion, output, threaded execution and scaling
//! runs on top of `psmflow-core`.

pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod runner;
pub mod scaling;
pub mod scenario;
pub mod units;
pub mod validate;

pub use config::{ScenarioConfig, ScenarioKind};
pub use error::{SimError, SimResult};
