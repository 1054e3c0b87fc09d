use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure categories. The CLI maps each variant family onto an exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical instability at cell {cell:?} (step {step}): {reason}")]
    Unstable {
        cell: [i64; 3],
        step: u64,
        reason: String,
    },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("particle {id} at {position:?} lies outside the linked-cell grid")]
    OutsideGrid { id: u64, position: [f64; 3] },

    #[error("cell {cell:?} is overlapped by more than two particles ({ids:?})")]
    TooManyOverlaps { cell: [i64; 3], ids: [u64; 3] },

    #[error("synchronization error: {0}")]
    Sync(String),
}

impl Error {
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Unstable { .. } | Error::Degenerate(_) | Error::TooManyOverlaps { .. }
        )
    }
}
