use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected} inputs, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("training failed in {layer} layer ({learner}): {message}")]
    Training {
        layer: String,
        learner: String,
        message: String,
    },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("model is not finalized")]
    NotFinalized,

    #[error("model file {field}: expected {expected}, found {found}")]
    Schema {
        field: String,
        expected: String,
        found: String,
    },

    #[error("malformed model file: {0}")]
    Model(String),

    #[error("code generation: {0}")]
    Codegen(String),

    #[error("equivalence check failed: {0}")]
    Equivalence(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn training(layer: &str, learner: &str, err: Error) -> Self {
        Error::Training {
            layer: layer.to_string(),
            learner: learner.to_string(),
            message: err.to_string(),
        }
    }
}
