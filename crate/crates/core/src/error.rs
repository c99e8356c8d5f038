// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AmmError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("invalid scale {value}: scales must be positive and finite")]
    InvalidScale { value: f64 },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid code {code} (must be < {limit})")]
    InvalidCode { code: usize, limit: usize },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AmmError>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(AmmError::Dimension(msg.into()))
}
