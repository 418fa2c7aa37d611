//! Pipeline errors and their process exit codes.

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Bad flags, subcommand or configuration.
pub const EXIT_USAGE: i32 = 1;
/// Missing, unreadable or malformed input files.
pub const EXIT_INPUT: i32 = 2;
/// An analysis stage failed on valid input.
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input file not found: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {reason}", path.display())]
    Malformed { path: PathBuf, reason: String },
    #[error("{stage}: {source}")]
    Computation {
        stage: &'static str,
        source: mobsense_core::Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => EXIT_USAGE,
            PipelineError::MissingInput(_) | PipelineError::Malformed { .. } => EXIT_INPUT,
            // Failing to write outputs is reported like unreadable input: the
            // environment, not the analysis, is at fault.
            PipelineError::Io { .. } => EXIT_INPUT,
            PipelineError::Computation { .. } => EXIT_COMPUTATION,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            PipelineError::MissingInput(path.to_path_buf())
        } else {
            PipelineError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }

    pub fn malformed(path: &Path, reason: impl ToString) -> Self {
        PipelineError::Malformed {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        }
    }

    pub fn computation(stage: &'static str) -> impl FnOnce(mobsense_core::Error) -> Self {
        move |source| PipelineError::Computation { stage, source }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;
