use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building models, loading data, or running the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hierarchy: {0}")]
    Hierarchy(String),

    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),

    #[error("level {level} is not strictly below {node}")]
    InvalidLevel { node: String, level: usize },

    #[error("table error: {0}")]
    Table(String),

    #[error("degenerate column `{0}`: standard deviation is zero")]
    DegenerateColumn(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("line {line}: {message}")]
    Preference { line: usize, message: String },

    #[error("lp error: {0}")]
    Lp(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
