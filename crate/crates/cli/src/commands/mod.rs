// SPDX-License-Identifier: Apache-2.0

pub mod eval;
pub mod report;
pub mod sim;
pub mod toy;
pub mod train;

use std::path::Path;

use maddness_core::dataio::read_matrix;
use ndarray::Array2;

use crate::args::Common;
use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub(crate) fn read_data(path: &Path) -> Result<Array2<f64>> {
    read_matrix(path).map_err(|e| CliError::from_amm(path, e))
}

pub(crate) fn load_config(common: &Common) -> Result<RunConfig> {
    RunConfig::load(common.config.as_deref())
}

pub(crate) fn seed(common: &Common, cfg: &RunConfig) -> u64 {
    common.seed.or(cfg.seed).unwrap_or(0)
}

pub(crate) fn csv_float(v: f64) -> String {
    format!("{v}")
}
