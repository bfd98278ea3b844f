use thiserror::Error;

/// Errors raised by samplers, estimators and verification checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The caller passed inconsistent arguments (dimension mismatch, empty
    /// point list, window not containing the origin, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// The model itself is invalid (non positive semi-definite covariance,
    /// all-zero coefficients, ...).
    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}

pub(crate) fn model<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Model(msg.into()))
}
