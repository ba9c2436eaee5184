use std::path::PathBuf;

use thiserror::Error;

use mwsrpdt_core::aco::AcoError;
use mwsrpdt_core::constructive::ConstructError;
use mwsrpdt_core::instances::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Stalled(#[from] ConstructError),
    /// The command ran but its answer is negative (infeasible solution,
    /// unproven optimum, ...).
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Csv(_) => 3,
            CliError::Stalled(_) => 4,
        }
    }
}

impl From<AcoError> for CliError {
    fn from(e: AcoError) -> Self {
        match e {
            AcoError::Construct(c) => CliError::Stalled(c),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
