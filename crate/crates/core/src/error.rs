//! Error type shared by every pipeline stage.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("duplicate profile id '{0}'")]
    DuplicateId(String),

    #[error("token '{0}' is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("no tokens meet min_count")]
    EmptyVocabulary,

    #[error("negative-sampling table size {size} is smaller than the vocabulary size {vocab}")]
    TableTooSmall { size: usize, vocab: usize },

    #[error("non-finite value during training at step {step} (token '{token}')")]
    NonFinite { step: u64, token: String },

    #[error("degenerate training labels")]
    DegenerateLabels,

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fold count {k} exceeds the size {class_size} of class '{class}'")]
    FoldCount {
        k: usize,
        class: String,
        class_size: usize,
    },

    #[error("no folds")]
    NoFolds,

    #[error("fold {fold}: token '{token}' unique to the test set leaked into the fold vocabulary")]
    Leakage { fold: usize, token: String },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported format version '{0}'")]
    FormatVersion(String),

    #[error("unknown {what} '{value}'")]
    UnknownName { what: &'static str, value: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn in_fold(self, fold: usize) -> Self {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
