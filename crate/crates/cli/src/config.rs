// SPDX-License-Identifier: Apache-2.0

//! Run configuration file. Every section is optional; command-line flags
//! override file values.
//!
//! ```toml
//! seed = 3
//!
//! [train]
//! subspaces = 4
//! levels = 4
//!
//! [sim]
//! ndec = [4, 8, 16, 32]
//! ns = [32]
//! inputs = 1000
//!
//! [macro]
//! preset = "0.5V"
//!
//! [timing]
//! t_hs_phase = 250.0
//! ```
//!
//! `[macro]`, `[timing]`, `[energy]` and `[area]` use the simulator's
//! parameter file format.

use std::path::Path;

use maddness_sim::{SimConfig, VoltagePreset};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub subspaces: Option<usize>,
    pub levels: Option<u32>,
    pub max_samples: Option<usize>,
    pub act_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Tree depths for the K sweep.
    pub k_sweep_levels: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub ndec: Option<Vec<usize>>,
    pub ns: Option<Vec<usize>>,
    pub inputs: Option<usize>,
    pub ops_per_lookup: Option<u32>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySection {
    pub train_per_class: Option<usize>,
    pub test_per_class: Option<usize>,
    pub noise: Option<f64>,
    pub levels: Option<Vec<u32>>,
    pub ridge: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub toy: ToySection,
    #[serde(rename = "macro")]
    pub macro_: Option<toml::Table>,
    pub timing: Option<toml::Table>,
    pub energy: Option<toml::Table>,
    pub area: Option<toml::Table>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Read `path` if given; a missing file is an I/O error, bad contents a
    /// config error.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    /// Simulator parameters for one macro shape, with `preset` (if given)
    /// replacing the file's preset.
    pub fn sim_config(&self, preset: Option<VoltagePreset>, n_dec: usize, n_s: usize) -> Result<SimConfig> {
        let mut doc = toml::Table::new();
        let mut mac = self.macro_.clone().unwrap_or_default();
        if let Some(p) = preset {
            mac.insert("preset".into(), toml::Value::String(p.label().into()));
        }
        mac.insert("n_dec".into(), toml::Value::Integer(n_dec as i64));
        mac.insert("n_s".into(), toml::Value::Integer(n_s as i64));
        doc.insert("macro".into(), toml::Value::Table(mac));
        for (name, table) in [("timing", &self.timing), ("energy", &self.energy), ("area", &self.area)] {
            if let Some(t) = table {
                doc.insert(name.into(), toml::Value::Table(t.clone()));
            }
        }
        let text = toml::to_string(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        let cfg = SimConfig::from_toml_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
