use thiserror::Error;

/// Crate-wide error type.
///
/// The variants are grouped so the CLI can map them onto its stable exit
/// codes: input/validation problems, exceeded enumeration caps, and internal
/// contract violations (which indicate a bug, never bad user input).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("infeasible solution: {0}")]
    InfeasibleSolution(String),

    #[error("infeasible enumeration: {0}")]
    InfeasibleEnumeration(String),

    #[error("search cap exceeded: {0}")]
    CapExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal contract violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn invalid_instance(msg: impl Into<String>) -> Self {
        Error::InvalidInstance(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
