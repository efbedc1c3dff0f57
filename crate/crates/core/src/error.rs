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

    #[error("row {row}: missing required column `{column}`")]
    MissingColumn { row: usize, column: &'static str },

    #[error("duplicate review id `{0}`")]
    DuplicateId(String),

    #[error("row {row}: unknown label `{token}` (expected `accessibility` or `other`)")]
    UnknownLabel { row: usize, token: String },

    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("row {row}: review `{id}` has no label")]
    Unlabeled { row: usize, id: String },

    #[error("insufficient negative pool: required {required}, available {available}")]
    InsufficientPool { required: usize, available: usize },

    #[error("cannot build {k} folds: class `{label}` has only {count} reviews")]
    ClassTooSmall {
        k: usize,
        label: &'static str,
        count: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite feature value in row {row}")]
    NonFinite { row: usize },

    #[error("invalid hyperparameter `{name}` for {algorithm}: {reason}")]
    Hyperparameter {
        algorithm: &'static str,
        name: String,
        reason: String,
    },

    #[error("unsupported format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("kappa is undefined: chance agreement is 1 but observed agreement is {observed}")]
    KappaUndefined { observed: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
