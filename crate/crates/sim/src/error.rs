use std::path::PathBuf;

/// Failures of the std layer, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{0}")]
    Core(#[from] psmflow_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("validation failed: {0}")]
    Validation(String),
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(vec![msg.into()])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 validation, 3 configuration, 4 numerical or synchronization, 5 I/O.
    /// Usage errors exit with 2 from the argument parser.
    pub fn exit_code(&self) -> i32 {
        use psmflow_core::Error as E;
        match self {
            SimError::Validation(_) => 1,
            SimError::Config(_) | SimError::Core(E::Config(_)) => 3,
            SimError::Core(_) => 4,
            SimError::Io { .. } => 5,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
