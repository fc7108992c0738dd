use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: instance `{id}`: field `{field}`: {message}")]
    Load {
        path: PathBuf,
        line: usize,
        id: String,
        field: String,
        message: String,
    },

    #[error("instance `{id}`: {message}")]
    Validation { id: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("transport failure after {attempts} attempt(s) (last status {status:?}): {message}")]
    Transport {
        status: Option<u16>,
        attempts: u32,
        message: String,
    },

    #[error("cache miss for work item `{0}`")]
    CacheMiss(String),

    #[error("metric `{0}` is undefined on an empty record set")]
    UndefinedMetric(&'static str),

    #[error("length mismatch: predicted {pred} vs gold {gold}")]
    LengthMismatch { pred: usize, gold: usize },

    #[error("{0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for invalid input, 3 for transport, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Load { .. }
            | Error::Validation { .. }
            | Error::Config(_)
            | Error::InvalidInput(_)
            | Error::Json(_) => 2,
            Error::Transport { .. } => 3,
            _ => 1,
        }
    }
}
