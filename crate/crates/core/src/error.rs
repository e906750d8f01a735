//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Vector/matrix shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A parameter fails its declared constraints (λ ∉ (0,1], b ≤ 0, …).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Numerical breakdown: singular matrix, degenerate generator, underflow.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Instance exceeds a hard cap (N! enumeration, Ryser permanents).
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}

impl Error {
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
