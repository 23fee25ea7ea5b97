use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input parsed but lacks a required structure (e.g. no word tier).
    #[error("structural error: {0}")]
    Structure(String),

    /// Unsupported or corrupt audio container.
    #[error("format error: {0}")]
    Format(String),

    /// A precondition of an operation was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Not enough words to satisfy a mask-target request.
    #[error("selection error: {0}")]
    Selection(String),

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
