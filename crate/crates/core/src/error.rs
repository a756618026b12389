use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("document `{doc_id}`: invalid {field}: {message}")]
    Invariant {
        doc_id: String,
        field: String,
        message: String,
    },

    #[error("cannot merge a {left} store with a {right} store")]
    KindMismatch {
        left: &'static str,
        right: &'static str,
    },

    #[error("document `{doc_id}`: mention {anaphor} must follow antecedent {antecedent}")]
    Ordering {
        doc_id: String,
        anaphor: usize,
        antecedent: usize,
    },

    #[error("document `{doc_id}`: infeasible constraints on mention {anaphor}: {reason}")]
    Infeasible {
        doc_id: String,
        anaphor: usize,
        reason: String,
    },

    #[error("no gold clusters in training data")]
    NoGold,

    #[error("document `{doc_id}`: {message}")]
    Evaluation { doc_id: String, message: String },

    #[error("model: {0}")]
    Model(String),

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invariant(doc_id: &str, field: &str, message: impl Into<String>) -> Self {
        Error::Invariant {
            doc_id: doc_id.to_string(),
            field: field.to_string(),
            message: message.into(),
        }
    }
}
