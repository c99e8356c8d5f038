// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::handshake::HandshakeError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model inconsistent with macro: {0}")]
    ModelMismatch(String),
    #[error("simulation fault at {time_ps:.1} ps: {message}")]
    Fault { time_ps: f64, message: String },
    #[error("handshake fault on link {link} at {time_ps:.1} ps: {source}")]
    Handshake {
        link: usize,
        time_ps: f64,
        #[source]
        source: HandshakeError,
    },
    #[error("deadlock at {time_ps:.1} ps with {completed}/{expected} outputs: {detail}")]
    Deadlock { time_ps: f64, completed: usize, expected: usize, detail: String },
    #[error("{0}")]
    Metrics(String),
    #[error(transparent)]
    Amm(#[from] maddness_core::AmmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
