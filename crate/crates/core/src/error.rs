use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate scale: data must contain at least two distinct values")]
    DegenerateScale,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state space has {size} joint configurations, enumeration limit is {limit}")]
    StateSpaceTooLarge { size: u128, limit: u128 },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, DdpError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DdpError {
    DdpError::InvalidArgument(msg.into())
}
