use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation failed: tail mass {tail:e} still above target after {terms} terms")]
    Truncation { tail: f64, terms: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("parse error (line {line}): {msg}")]
    Parse { line: usize, msg: String },

    #[error("condition not supported by this moment source: {0}")]
    UnsupportedCondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
