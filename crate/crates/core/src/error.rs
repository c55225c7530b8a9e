use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{message}, line {line}")]
    Parse {
        reason: &'static str,
        line: u64,
        message: String,
    },

    #[error("unknown header: expected `{expected}`, found `{found}`")]
    UnknownHeader { expected: String, found: String },

    #[error("incomplete sensor history for cow {cow_id}: missing {missing}")]
    IncompleteSensorHistory { cow_id: String, missing: String },

    #[error("incomplete window for cow {cow_id}: missing {missing}")]
    IncompleteWindow { cow_id: String, missing: String },

    #[error("insufficient groups: need at least {needed}, found {found}")]
    InsufficientGroups { needed: usize, found: usize },

    #[error("insufficient episodes: need at least {needed} matched cases, found {found}")]
    InsufficientEpisodes { needed: usize, found: usize },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible config: {0}")]
    InfeasibleConfig(String),

    #[error("unsupported model schema version {0}")]
    SchemaVersion(u32),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { reason, .. } => reason,
            Error::UnknownHeader { .. } => "unknown_header",
            Error::IncompleteSensorHistory { .. } => "incomplete_sensor_history",
            Error::IncompleteWindow { .. } => "incomplete_window",
            Error::InsufficientGroups { .. } => "insufficient_groups",
            Error::InsufficientEpisodes { .. } => "insufficient_episodes",
            Error::InsufficientSamples(_) => "insufficient_samples",
            Error::EmptyInput(_) => "empty_input",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InfeasibleConfig(_) => "infeasible_config",
            Error::SchemaVersion(_) => "schema_version",
            Error::Io { .. } => "io_error",
            Error::Csv(_) => "malformed_row",
            Error::Json(_) => "json_error",
        }
    }

    /// Line number for row-level parse failures.
    pub fn line(&self) -> Option<u64> {
        match self {
            Error::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub(crate) fn parse(reason: &'static str, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            reason,
            line,
            message: message.into(),
        }
    }
}
