// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CnnError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid network description: {0}")]
    Network(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Amm(#[from] maddness_core::AmmError),
    #[error(transparent)]
    Sim(#[from] maddness_sim::SimError),
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CnnError>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(CnnError::Dimension(msg.into()))
}
