use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}: unknown item ids referenced: {}", ids.join(", "))]
    DanglingItems { file: String, ids: Vec<String> },

    #[error("invalid judgment: {0}")]
    InvalidJudgment(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no embedding for item `{0}`")]
    MissingEmbedding(String),

    #[error("no embedding for user `{0}`")]
    MissingUser(String),

    #[error("training diverged (non-finite loss); try a smaller learning rate")]
    Diverged,

    #[error("attribute `{0}` has no textual evidence")]
    NoTextualEvidence(String),

    #[error("attribute `{0}` has insufficient positive evidence")]
    InsufficientEvidence(String),

    #[error("no usable preferences for attribute `{0}`")]
    NoPreferences(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("missing score for item `{0}`")]
    MissingScore(String),

    #[error("task cannot be generated: {0}")]
    Sampler(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
