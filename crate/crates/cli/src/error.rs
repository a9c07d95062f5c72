use std::path::PathBuf;

use thiserror::Error;

/// CLI failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("stale artifacts: {0}")]
    Stale(String),

    #[error("missing upstream stage: `{stage}` needs `{upstream}`; run `citegraph {upstream}` first")]
    MissingUpstream { stage: String, upstream: String },

    #[error("artifact directory is locked by {path} ({holder}); remove it if no stage is running")]
    Locked { path: PathBuf, holder: String },

    #[error(transparent)]
    Core(#[from] citegraph_core::Error),

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stale(_) | CliError::MissingUpstream { .. } => 3,
            CliError::Locked { .. } | CliError::Core(_) | CliError::Runtime(_) => 4,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<citegraph_service::ServiceError> for CliError {
    fn from(e: citegraph_service::ServiceError) -> Self {
        CliError::Runtime(e.to_string())
    }
}
