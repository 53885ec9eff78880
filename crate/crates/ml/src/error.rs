use thiserror::Error;

pub type Result<T, E = MlError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("row {row_id}: expected {expected} values, found {found}")]
    Arity {
        row_id: String,
        expected: usize,
        found: usize,
    },

    #[error("row {row_id}: feature `{feature}` must be {expected}")]
    KindMismatch {
        row_id: String,
        feature: String,
        expected: &'static str,
    },

    #[error("row {row_id}: non-finite value in feature `{feature}`")]
    NonFinite { row_id: String, feature: String },

    #[error("row {row_id}: non-finite target")]
    NonFiniteTarget { row_id: String },

    #[error("dataset has {rows} rows but {targets} targets and {ids} row ids")]
    LengthMismatch {
        rows: usize,
        targets: usize,
        ids: usize,
    },

    #[error("target must be binary (0/1); row {row_id} has {value}")]
    NonBinaryTarget { row_id: String, value: f64 },

    #[error("class {class} has {count} rows; at least {required} are needed")]
    ClassTooSmall {
        class: u8,
        count: usize,
        required: usize,
    },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("hyperparameter grid is empty")]
    EmptyGrid,

    #[error("invalid hyperparameter `{name}` = {value}: {reason}")]
    InvalidHyperparameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("class weights must be finite and positive (got {negative}, {positive})")]
    InvalidClassWeight { negative: f64, positive: f64 },

    #[error("{algorithm} does not support {task}")]
    UnsupportedAlgorithm {
        algorithm: &'static str,
        task: &'static str,
    },

    #[error("schema fingerprint mismatch: model expects {expected}, input has {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("model was trained for {expected}, not {requested}")]
    WrongTask {
        expected: &'static str,
        requested: &'static str,
    },

    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),

    #[error("unsupported artifact format version {found} (expected {expected})")]
    ArtifactVersion { found: u32, expected: u32 },

    #[error("artifact serialization: {0}")]
    Serde(#[from] serde_json::Error),
}
