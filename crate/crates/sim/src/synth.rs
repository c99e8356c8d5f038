// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic models and inputs sized to a macro.

use maddness_core::{BdtNode, BdtTree, CodebookSet, LearnedModel, PartitionScheme, QuantizedLut};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoder::ENCODER_LEVELS;
use crate::error::Result;
use crate::params::SimConfig;

/// Subvector length of a 3×3 patch.
pub const PATCH_DIM: usize = 9;

fn assemble(cfg: &SimConfig, sub_dim: usize, trees: Vec<BdtTree>, entries: Vec<i8>) -> Result<LearnedModel> {
    let scheme = PartitionScheme::new(cfg.n_s * sub_dim, cfg.n_s)?;
    let k = 1usize << ENCODER_LEVELS;
    let mut model = LearnedModel::new(scheme, trees, CodebookSet::zeros(scheme, k)?, 1.0)?;
    model.lut = Some(QuantizedLut::from_parts(cfg.n_s, k, cfg.n_dec, entries, vec![1.0; cfg.n_dec])?);
    Ok(model)
}

/// Random trees and LUT entries for a `cfg`-shaped macro.
pub fn random_model(cfg: &SimConfig, sub_dim: usize, seed: u64) -> Result<LearnedModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes_per_tree = (1usize << ENCODER_LEVELS) - 1;
    let trees = (0..cfg.n_s)
        .map(|_| {
            let nodes = (0..nodes_per_tree).map(|_| BdtNode::new(rng.random_range(0..sub_dim), rng.random())).collect();
            BdtTree::new(ENCODER_LEVELS, sub_dim, nodes)
        })
        .collect::<maddness_core::Result<Vec<_>>>()?;
    let n_entries = cfg.n_s * (1 << ENCODER_LEVELS) * cfg.n_dec;
    let entries = (0..n_entries).map(|_| rng.random()).collect();
    assemble(cfg, sub_dim, trees, entries)
}

/// Every node splits element 0 at `threshold`; LUT entries are all `entry`.
pub fn uniform_model(cfg: &SimConfig, sub_dim: usize, threshold: u8, entry: i8) -> Result<LearnedModel> {
    let trees = (0..cfg.n_s)
        .map(|_| BdtTree::uniform(ENCODER_LEVELS, sub_dim, 0, threshold))
        .collect::<maddness_core::Result<Vec<_>>>()?;
    let entries = vec![entry; cfg.n_s * (1 << ENCODER_LEVELS) * cfg.n_dec];
    assemble(cfg, sub_dim, trees, entries)
}

pub fn random_inputs(rows: usize, cols: usize, seed: u64) -> Array2<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((rows, cols), || rng.random())
}

/// Inputs for [`uniform_model`] with threshold 0x80 where every DLC resolves
/// at its first stage (`best`) or runs all eight stages (`!best`).
pub fn corner_case_inputs(rows: usize, cols: usize, best: bool) -> Array2<u8> {
    Array2::from_elem((rows, cols), if best { 0x00 } else { 0x80 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::VoltagePreset;

    #[test]
    fn random_model_fits_macro() {
        let cfg = SimConfig::preset(VoltagePreset::V0p5, 4, 3);
        let m = random_model(&cfg, PATCH_DIM, 1).unwrap();
        crate::engine::check_model(&m, &cfg).unwrap();
        assert_eq!(m, random_model(&cfg, PATCH_DIM, 1).unwrap());
    }
}
