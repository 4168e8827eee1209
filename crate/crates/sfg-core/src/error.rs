use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scan contains no usable peak (flat data or peak truncated by the
    /// scan range).
    #[error("no peak found: {0}")]
    PeakNotFound(String),

    /// A truncated state space would exceed the configured dimension cap.
    #[error("state space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
