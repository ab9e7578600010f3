use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variant {variant:?} is claimed by both {first:?} and {second:?}")]
    VariantCollision {
        variant: String,
        first: String,
        second: String,
    },

    #[error("glossary entry has empty canonical text (line {line})")]
    EmptyEntry { line: usize },

    #[error("ingestion failed: {}", .problems.join("; "))]
    Ingestion { problems: Vec<String> },

    #[error("no glossary occurrences in corpus")]
    NoOccurrences,

    #[error("zero vector has no direction; cosine is undefined")]
    ZeroVector,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("no rich-club regime detected; try another mode or pass an explicit club cut")]
    NoRegime,

    #[error("group {0:?} is empty")]
    EmptyGroup(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
