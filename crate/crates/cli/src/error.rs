use std::path::PathBuf;

use chainvalue_core::CoreError;
use chainvalue_ml::MlError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {}", .problems.join("; "))]
    Config { problems: Vec<String> },

    #[error("run {producer} first: {name} missing")]
    MissingInput {
        producer: &'static str,
        name: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Ml(#[from] MlError),

    #[error("{0}")]
    Stage(String),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::MissingInput { .. } => "missing_input",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Core(_) => "data",
            CliError::Ml(_) => "model",
            CliError::Stage(_) => "stage",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({"kind": self.kind(), "message": self.to_string()});
        match self {
            CliError::Config { problems } => body["problems"] = json!(problems),
            CliError::MissingInput { producer, name } => {
                body["missing"] = json!(name);
                body["run_first"] = json!(producer);
            }
            _ => {}
        }
        json!({ "error": body })
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::MissingInput { .. } => 3,
            _ => 1,
        }
    }
}
