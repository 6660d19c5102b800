use thiserror::Error;

/// Errors produced by the covariance-matrix toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a state: {0}")]
    NotAState(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("steering party block not invertible (condition number {0:.3e})")]
    SingularSteeringBlock(f64),

    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid quadrature combination: {0}")]
    InvalidCombo(String),

    #[error("not a symplectic matrix (max deviation {0:.3e})")]
    NotSymplectic(f64),

    #[error("no threshold in range: {0}")]
    NoThreshold(String),

    #[error("too few samples: need at least {needed}, got {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("tomography failed: {0}")]
    Tomography(String),
}

pub type Result<T> = std::result::Result<T, Error>;
