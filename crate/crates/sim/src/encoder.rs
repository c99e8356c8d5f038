// SPDX-License-Identifier: Apache-2.0

//! Tournament of DLCs realizing the 4-level decision tree.

use maddness_core::BdtTree;
use serde::{Deserialize, Serialize};

use crate::dlc::dlc_compare;
use crate::error::{Result, SimError};
use crate::params::SimConfig;

pub const ENCODER_LEVELS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderResult {
    pub code: u8,
    pub latency_ps: f64,
    pub energy_fj: f64,
    /// Resolved stage count of each activated DLC, root first.
    pub stages: [u8; ENCODER_LEVELS as usize],
}

/// Closed-form latency for the given per-level stage counts.
pub fn encoder_latency(stages: &[u8], cfg: &SimConfig) -> f64 {
    stages.iter().map(|&s| s as f64 * cfg.timing.t_dlc_stage + cfg.timing.t_mux).sum()
}

/// Energy of one traversal: only the activated DLC on each level evaluates.
pub fn encoder_energy(cfg: &SimConfig) -> f64 {
    ENCODER_LEVELS as f64 * cfg.energy.e_dlc_eval
}

pub fn encoder_traverse(subvector: &[u8], tree: &BdtTree, cfg: &SimConfig) -> Result<EncoderResult> {
    if tree.levels() != ENCODER_LEVELS {
        return Err(SimError::ModelMismatch(format!(
            "encoder has {ENCODER_LEVELS} DLC levels, tree has {}",
            tree.levels()
        )));
    }
    if subvector.len() < tree.sub_dim() {
        return Err(SimError::ModelMismatch(format!(
            "subvector of length {} for a tree over {} dims",
            subvector.len(),
            tree.sub_dim()
        )));
    }
    let nodes = tree.nodes();
    let mut stages = [0u8; ENCODER_LEVELS as usize];
    let mut node = 0usize;
    let mut code = 0u8;
    for s in stages.iter_mut() {
        let n = &nodes[node];
        // YP asserted means threshold > x, i.e. the left branch.
        let r = dlc_compare(n.threshold, subvector[n.split_dim]);
        let bit = !r.greater as u8;
        *s = r.stages;
        code = (code << 1) | bit;
        node = 2 * node + 1 + bit as usize;
    }
    Ok(EncoderResult { code, latency_ps: encoder_latency(&stages, cfg), energy_fj: encoder_energy(cfg), stages })
}
