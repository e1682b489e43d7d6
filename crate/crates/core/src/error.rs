use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-side contract was violated (bad step size, mismatched sizes, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A mathematical hypothesis needed by a bound does not hold.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// A state failed its own validity invariants (non-finite entries, ...).
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// A numeric procedure broke down (quadrature, ODE step underflow, mass drift, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The requested diagnostic needs data the instance does not provide.
    #[error("unsupported diagnostic: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
