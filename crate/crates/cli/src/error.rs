use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario {scenario}: {source}")]
    Solver {
        scenario: String,
        #[source]
        source: rmt_clt::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Config(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Maps a core failure inside a scenario: invalid settings are
    /// configuration errors, everything else is a solver failure.
    pub(crate) fn from_core(scenario: &str, source: rmt_clt::Error) -> Self {
        match source {
            rmt_clt::Error::Config(msg) => CliError::Config(format!("scenario {scenario}: {msg}")),
            source => CliError::Solver {
                scenario: scenario.to_string(),
                source,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
