use thiserror::Error;

/// Errors surfaced by tensor construction, spectral operators, and solvers.
#[derive(Debug, Error)]
pub enum TenrecError {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("mode {mode} out of range for order-{order} tensor (modes are 1..=N)")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("observation mask has no observed entries")]
    EmptyMask,

    #[error("SVD did not converge")]
    SvdFailed,

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("solver diverged at iteration {iteration} (state magnitude exceeded {limit:e})")]
    Diverged { iteration: usize, limit: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad tensor container: {0}")]
    BadContainer(String),
}

pub type Result<T> = std::result::Result<T, TenrecError>;
