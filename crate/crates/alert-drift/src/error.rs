//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error enum. Variants map one-to-one onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model format error: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Csv {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_messages_name_the_offending_path() {
        let err = Error::csv("data/d0.csv", "row 3, column rss_node_2: non-numeric cell 'abc'");
        let msg = err.to_string();
        assert!(msg.contains("data/d0.csv"));
        assert!(msg.contains("row 3"));
    }
}
