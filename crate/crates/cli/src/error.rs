use std::fmt::Display;
use std::path::{Path, PathBuf};

use otslab_core::analysis::AnalysisError;
use otslab_core::words::SchedulerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    /// Failures while running: scheduler guards, invariant breaches.
    #[error("{0}")]
    Runtime(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Violations(String),
}

impl CliError {
    pub fn validation(e: impl Display) -> Self {
        Self::Validation(e.to_string())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Runtime(_) | Self::Io { .. } => 2,
            Self::Violations(_) => 3,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Shape(_)
            | AnalysisError::Parameter(_)
            | AnalysisError::EmptyTrace
            | AnalysisError::Scheduler(SchedulerError::Precondition(_)) => Self::Validation(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}
