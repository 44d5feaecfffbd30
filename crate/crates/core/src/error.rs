use thiserror::Error;

/// Errors raised by the norm engines, certificate builders and reports.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive engine refused an input that exceeds its support cap.
    #[error("support of size {support} exceeds the exhaustive-search cap of {cap}")]
    CapExceeded { cap: usize, support: usize },

    /// A construction was asked for parameters outside the range where it is valid.
    /// The payload names the violated inequality.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical invariant failed at a concrete point.
    #[error("check failed: {0}")]
    CheckFailed(String),

    /// A root or minimum could not be bracketed.
    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("unknown space tag `{0}`")]
    UnknownSpace(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
