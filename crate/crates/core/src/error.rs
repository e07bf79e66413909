use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or model fails its structural invariants.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A model specification is malformed.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A numeric hypothesis of an operation is violated (moments, variance, spectral radius).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The operation does not apply to this kind of model.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The exact oracle would exceed its memory cap.
    #[error("support overflow: {needed} bytes requested, cap is {cap} bytes")]
    SupportOverflow { needed: u64, cap: u64 },

    /// Experiment configuration rejected.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
