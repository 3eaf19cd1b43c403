use std::io;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("underdetermined system: {0}")]
    Underdetermined(String),

    #[error("fold too small: {0}; try a smaller k")]
    FoldTooSmall(String),

    #[error("unknown sensor id {0}")]
    UnknownId(u32),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
