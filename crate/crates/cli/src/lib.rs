//! Configuration, checkpoints, CSV diagnostics and the `ipconv` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! instability, 3 verification gate failure.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod diagnostics;

use std::path::PathBuf;

use thiserror::Error;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointError};
pub use config::{parse_config, ConfigError, SimConfig};
pub use diagnostics::{read_diagnostics, DiagnosticsWriter};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Setup(#[from] config::SetupError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: diagnostics::CsvError },
    #[error("{path}: {source}")]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error("{0}")]
    Evolution(ipconv::EvolutionError),
    #[error(transparent)]
    Verification(#[from] ipconv::VerificationError),
    #[error(
        "non-finite state at t = {time}; last finite state at t = {last_good_time}{}",
        dumped.as_ref().map(|p| format!(" saved to {}", p.display())).unwrap_or_default()
    )]
    Instability { time: f64, last_good_time: f64, dumped: Option<PathBuf> },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INSTABILITY: i32 = 2;
pub const EXIT_GATE: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Instability { .. } => EXIT_INSTABILITY,
            Self::Verification(ipconv::VerificationError::Evolution(
                ipconv::EvolutionError::NonFinite { .. },
            )) => EXIT_INSTABILITY,
            _ => EXIT_USAGE,
        }
    }
}
