use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input shapes do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Exact enumeration was requested for a problem that is too large.
    #[error("sample of {n} points exceeds the enumeration limit of {max}; use the Monte-Carlo estimator instead")]
    TooLargeForEnumeration { n: usize, max: usize },

    /// A kernel matrix stayed indefinite after the whole jitter ladder.
    #[error("matrix not positive definite after jitter {jitter:e} (diagonal range [{min_diag:e}, {max_diag:e}])")]
    NotPositiveDefinite { jitter: f64, min_diag: f64, max_diag: f64 },

    /// Unknown codec identifier.
    #[error("unknown codec `{0}`")]
    UnknownCodec(String),

    /// A compressed artifact could not be decoded.
    #[error("malformed artifact: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
