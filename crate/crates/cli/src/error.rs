use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] clarq_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing artifact `{artifact}` ({}); run the command that produces it first", path.display())]
    MissingArtifact { artifact: String, path: PathBuf },

    #[error("artifact `{artifact}` was produced by config {found}, current config is {expected}; pass --allow-mixed to use it anyway")]
    MixedArtifacts {
        artifact: String,
        expected: String,
        found: String,
    },

    #[error("work directory is locked by {}; another run is active or a stale lock was left behind", path.display())]
    Locked { path: PathBuf },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingArtifact { .. } => 2,
            CliError::MixedArtifacts { .. } => 3,
            CliError::Locked { .. } => 4,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Config(_) => "config",
            CliError::MissingArtifact { .. } => "missing_artifact",
            CliError::MixedArtifacts { .. } => "mixed_artifacts",
            CliError::Locked { .. } => "locked",
        }
    }

    /// One-line JSON report for stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::MissingArtifact { artifact, path } => {
                v["artifact"] = json!(artifact);
                v["path"] = json!(path.display().to_string());
            }
            CliError::MixedArtifacts { artifact, .. } => v["artifact"] = json!(artifact),
            CliError::Core(clarq_core::Error::CollapsedStage { stage }) => v["stage"] = json!(stage),
            _ => {}
        }
        v
    }
}
