use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below cutoff {cutoff:e}")]
    NotPsd { eigenvalue: f64, cutoff: f64 },

    #[error("tuple is not commuting: commutator witness {witness:e} exceeds threshold {threshold:e}")]
    NotCommuting { witness: f64, threshold: f64 },

    #[error("numerical breakdown: {0}")]
    Breakdown(String),

    #[error("joint eigenvalue oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
