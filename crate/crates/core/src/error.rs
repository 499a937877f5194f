use thiserror::Error;

/// Errors produced by schedule construction, scenario validation and the
/// numeric operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A structurally invalid input: bad parameter domain, mismatched
    /// lengths, inconsistent scenario description.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the mathematical domain of an operation
    /// (e.g. an evaluation point t ≥ 1 for the FDR estimator).
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
