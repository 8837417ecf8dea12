use thiserror::Error;

/// Errors raised by the regression library and benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied invalid input (dimensions, ranges, non-finite values).
    #[error("invalid input: {0}")]
    Input(String),

    /// A factorization failed even after diagonal jitter.
    #[error("numerical failure: {message} (jitter tried: {jitter:?})")]
    Numerical { message: String, jitter: Vec<f64> },

    /// Malformed CSV content; `line` is 1-based and counts data rows after the header.
    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Invalid benchmark configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
