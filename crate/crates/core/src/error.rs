use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the retrieval pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: field `{field}`: {message}")]
    MalformedRow {
        row: usize,
        field: String,
        message: String,
    },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("dimension mismatch: {context} expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("all documents are empty; nothing to vectorize")]
    EmptyCorpus,

    #[error("document has no in-vocabulary terms")]
    OutOfVocabulary,

    #[error("nothing to embed: query text is empty")]
    EmptyQuery,

    #[error("matrix is all zeros")]
    DegenerateMatrix,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("need at least two clusters, found {0}")]
    TooFewClusters(usize),

    #[error("class {class} has {count} member(s); stratified split needs at least 2")]
    ClassTooSmall { class: usize, count: usize },

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("inconsistent components: {0}")]
    Inconsistent(String),

    #[error("cluster {0} has no members in the index")]
    EmptyCluster(usize),

    #[error("embedding provider failed: {0}")]
    Provider(String),

    #[error("artifact format error in {path}: {message}")]
    Artifact { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Artifact {
            path: path.into(),
            message: message.into(),
        }
    }
}
