use thiserror::Error;

/// Errors raised by the spectral, Littlewood-Paley, solver and diagnostics layers.
#[derive(Debug, Error)]
pub enum SqgError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coefficients are not Hermitian-symmetric (max defect {max_defect:.3e})")]
    SymmetryViolation { max_defect: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite values detected after t = {last_finite_time}")]
    Blowup { last_finite_time: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SqgError> = std::result::Result<T, E>;
