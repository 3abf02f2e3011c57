use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("scenario incomplete: {0}")]
    ScenarioIncomplete(String),

    #[error("schema violation in {path}: {message}")]
    SchemaViolation { path: PathBuf, message: String },

    #[error("unknown drone type: {0:?}")]
    UnknownDroneType(String),

    #[error("unknown flight pattern: {0:?}")]
    UnknownPattern(String),

    #[error("nothing to merge")]
    NothingToMerge,

    #[error("empty frame")]
    EmptyFrame,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("column not found: {0}")]
    ColumnNotFound(String),

    #[error("silhouette undefined: {0}")]
    SilhouetteUndefined(String),

    #[error("no drone cluster")]
    NoDroneCluster,

    #[error("degenerate groups: {0}")]
    DegenerateGroups(String),

    #[error("empty input")]
    EmptyInput,

    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),

    #[error("undefined R²: observed values are constant")]
    UndefinedR2,

    #[error("single-class labels")]
    SingleClass,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("not a URANUS model")]
    NotAModel,

    #[error("model version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u16, found: u16 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
