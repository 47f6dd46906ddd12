use thiserror::Error;

/// Errors raised by the qphlab core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("layout mismatch: {0:?} vs {1:?}")]
    LayoutMismatch(Vec<usize>, Vec<usize>),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("factor index {index} out of range for {factors} factors")]
    IndexOutOfRange { index: usize, factors: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid effect: eigenvalues must lie in [0, 1], found [{min:e}, {max:e}]")]
    InvalidEffect { min: f64, max: f64 },

    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("gate is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("vanishing probability {0:e}")]
    VanishingProbability(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
