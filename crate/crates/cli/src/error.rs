// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use maddness_cnn::CnnError;
use maddness_core::AmmError;
use maddness_sim::SimError;
use thiserror::Error;

/// Failures surfaced to the user. Exit code 1 covers usage and configuration,
/// 2 covers I/O, data and run-time faults.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Io { .. } | CliError::Data(_) => 2,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// A data-file failure, prefixed with the file it came from.
    pub fn from_amm(path: &Path, err: AmmError) -> Self {
        match err {
            AmmError::Io(source) => CliError::io(path, source),
            other => CliError::Data(format!("{}: {other}", path.display())),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::ModelMismatch(_) | SimError::Toml(_) => CliError::Config(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<CnnError> for CliError {
    fn from(e: CnnError) -> Self {
        match e {
            CnnError::Network(_) | CnnError::Toml(_) => CliError::Config(e.to_string()),
            CnnError::Sim(s) => s.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
