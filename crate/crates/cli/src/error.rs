use std::path::PathBuf;

use framecheck::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{field}` (line {line}, column {column}): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config value `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("precondition failed: {0}")]
    Precondition(GeomError),

    #[error("{message}")]
    Failed { message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(field: &str, e: GeomError) -> Self {
        CliError::Invalid {
            field: field.to_string(),
            message: e.to_string(),
        }
    }

    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed { .. } => 1,
            _ => 2,
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::Precondition(e)
    }
}
