use std::path::PathBuf;

/// Errors produced by the optimizer, the classifier and the data layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fitness evaluation failed for drawing {drawing}: {source}")]
    Fitness {
        drawing: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: u64,
        message: String,
    },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        path: PathBuf,
        row: u64,
        column: usize,
        value: String,
    },

    #[error("exhaustive search over {dimension} features refused (limit is {limit})")]
    OracleGuard { dimension: usize, limit: usize },

    #[error("run with seed {seed} failed: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
