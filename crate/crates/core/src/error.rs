use std::path::PathBuf;

use chainvalue_ml::MlError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: invalid JSON at byte {offset}: {message}", path.display())]
    Json {
        path: PathBuf,
        offset: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },

    #[error("competition index not found: {}", path.display())]
    CompetitionNotFound { path: PathBuf },

    #[error("ball state ({x}, {y}) lies outside the 120x80 pitch")]
    OutOfBounds { x: f64, y: f64 },

    #[error("no role for players {0:?}")]
    MissingRole(Vec<u64>),

    #[error("no appearances for credited players {0:?}")]
    MissingAppearances(Vec<u64>),

    #[error("window end {end} precedes start {start}")]
    InvertedWindow {
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },

    #[error("not enough eligible {group}: need {needed}, found {found}")]
    InsufficientPlayers {
        group: String,
        needed: usize,
        found: usize,
    },

    #[error("malformed link override line {line}: {text:?}")]
    BadOverride { line: usize, text: String },

    #[error(transparent)]
    Ml(#[from] MlError),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

impl CoreError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }

    /// Converts a serde_json line/column position into a byte offset in `text`.
    pub(crate) fn json(path: impl Into<PathBuf>, text: &str, err: &serde_json::Error) -> Self {
        let mut offset = 0;
        for (i, line) in text.split_inclusive('\n').enumerate() {
            if i + 1 == err.line() {
                offset += err.column().saturating_sub(1).min(line.len());
                break;
            }
            offset += line.len();
        }
        CoreError::Json {
            path: path.into(),
            offset,
            message: err.to_string(),
        }
    }
}
