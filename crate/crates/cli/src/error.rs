use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown {slot} operator kind `{kind}` (expected one of: {expected})")]
    UnknownKind {
        slot: &'static str,
        kind: String,
        expected: &'static str,
    },
    #[error("declared beta {declared} for B is not a valid cocoercivity constant (worst violation {violation:.3e})")]
    BetaRejected { declared: f64, violation: f64 },
    #[error("{0}")]
    Solver(#[from] fbb_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fbb_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::UnknownKind { .. } | CliError::BetaRejected { .. } => {
                EXIT_IO
            }
            CliError::Solver(e) => match e {
                E::InvalidInput(_) | E::UnknownMethod(_) | E::Inapplicable { .. } | E::DimensionMismatch { .. } => EXIT_USAGE,
                E::UnsupportedKind(_) => EXIT_IO,
                _ => EXIT_NOT_CONVERGED,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
