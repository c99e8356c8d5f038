// SPDX-License-Identifier: Apache-2.0

//! Executing a mapped layer on the functional engine or the simulator.

use maddness_core::{
    decode_accumulate, encode_all, exact_gemm, quantize_matrix, CodebookSet, EncodedCodes, LearnedModel,
    PartitionScheme,
};
use maddness_sim::{simulate, EnergyLedger, SimConfig, SimOptions, VoltagePreset};
use ndarray::{s, Array2, Array3, ArrayView2, ArrayView3};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::layer::{ConvLayerSpec, PATCH_LEN};
use crate::mapping::{MappingPlan, Tile};
use crate::patches::extract_patches;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Functional,
    Simulator(VoltagePreset),
}

/// Simulator totals over all tiles of one layer run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimTotals {
    pub energy: EnergyLedger,
    pub lookups: u64,
    /// Sum of per-tile makespans (tiles run one after another).
    pub time_ps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutput {
    /// Accumulated 16-bit values, `[c_out][out_h][out_w]`.
    pub raw: Array3<i16>,
    /// `raw` times the per-kernel LUT scale.
    pub values: Array3<f64>,
    /// Output positions whose running sum left the 16-bit range.
    pub overflowed: usize,
    pub sim: Option<SimTotals>,
}

/// Running 16-bit partial sums carried between channel passes.
struct Carry {
    wrapped: Array2<i16>,
    exact: Array2<i32>,
    overflow: Vec<bool>,
}

impl Carry {
    fn new(positions: usize, c_out: usize) -> Self {
        Self {
            wrapped: Array2::zeros((positions, c_out)),
            exact: Array2::zeros((positions, c_out)),
            overflow: vec![false; positions],
        }
    }

    /// Add one pass result (`values` per position over `tile.kernels`).
    fn add(&mut self, pos: usize, tile: &Tile, values: &[i16], pass_exact: &[i32], pass_overflow: bool) {
        let mut flag = pass_overflow;
        for ((j, &v), &e) in tile.kernels.clone().zip(values).zip(pass_exact) {
            self.wrapped[[pos, j]] = self.wrapped[[pos, j]].wrapping_add(v);
            let total = self.exact[[pos, j]] + e;
            flag |= i16::try_from(total).is_err();
            self.exact[[pos, j]] = total;
        }
        self.overflow[pos] |= flag;
    }
}

fn check_model(layer: &ConvLayerSpec, model: &LearnedModel) -> Result<()> {
    let lut = model.require_lut()?;
    if model.scheme.m() != layer.c_in || model.scheme.sub_dim() != PATCH_LEN {
        return dim_err(format!(
            "model has {} subspaces of {} dims, layer needs {} of {PATCH_LEN}",
            model.scheme.m(),
            model.scheme.sub_dim(),
            layer.c_in
        ));
    }
    if lut.n_out() != layer.c_out {
        return dim_err(format!("LUT has {} columns for {} kernels", lut.n_out(), layer.c_out));
    }
    Ok(())
}

/// Exact wide sum of the LUT entries selected by `codes` over a tile.
fn exact_pass(model: &LearnedModel, codes: &[u8], tile: &Tile) -> Vec<i32> {
    let lut = model.lut.as_ref().expect("checked");
    tile.kernels
        .clone()
        .map(|j| tile.channels.clone().map(|m| lut.entry(m, codes[m] as usize, j) as i32).sum())
        .collect()
}

/// Sub-model holding only the tile's trees and LUT slice.
fn tile_model(model: &LearnedModel, tile: &Tile) -> Result<LearnedModel> {
    let lut = model.lut.as_ref().expect("checked");
    let scheme = PartitionScheme::new(tile.channels.len() * PATCH_LEN, tile.channels.len())?;
    let trees = model.trees[tile.channels.clone()].to_vec();
    let mut sub = LearnedModel::new(scheme, trees, CodebookSet::zeros(scheme, model.k())?, model.act_scale)?;
    sub.lut = Some(lut.slice(tile.channels.clone(), tile.kernels.clone())?);
    Ok(sub)
}

pub fn run_layer(
    plan: &MappingPlan,
    layer: &ConvLayerSpec,
    model: &LearnedModel,
    input: ArrayView3<'_, f64>,
    backend: Backend,
) -> Result<LayerOutput> {
    check_model(layer, model)?;
    let patches = extract_patches(input, layer)?;
    let q = quantize_matrix(patches.view(), model.act_scale)?;
    let codes = encode_all(q.view(), &model.scheme, &model.trees)?;
    let positions = layer.positions();
    let mut carry = Carry::new(positions, layer.c_out);
    let mut sim = matches!(backend, Backend::Simulator(_)).then(SimTotals::default);
    let lut = model.lut.as_ref().expect("checked");

    for tile in &plan.tiles {
        match backend {
            Backend::Functional => {
                let tile_lut = lut.slice(tile.channels.clone(), tile.kernels.clone())?;
                for (pos, row) in codes.iter().enumerate() {
                    let slice = EncodedCodes::new(row.as_slice()[tile.channels.clone()].to_vec(), model.k())?;
                    let d = decode_accumulate(&slice, &tile_lut)?;
                    let exact = exact_pass(model, row.as_slice(), tile);
                    carry.add(pos, tile, &d.values, &exact, d.overflow);
                }
            }
            Backend::Simulator(preset) => {
                let sub = tile_model(model, tile)?;
                let cfg = SimConfig::preset(preset, tile.kernels.len(), tile.channels.len());
                let cols = tile.channels.start * PATCH_LEN..tile.channels.end * PATCH_LEN;
                let x = q.slice(s![.., cols]);
                let out = simulate(x, &sub, &cfg, &SimOptions::default())?;
                for (pos, d) in out.outputs.iter().enumerate() {
                    let exact = exact_pass(model, codes[pos].as_slice(), tile);
                    carry.add(pos, tile, &d.values, &exact, d.overflow);
                }
                let totals = sim.as_mut().expect("simulator backend");
                totals.energy.categories.merge(&out.energy.categories);
                totals.lookups += out.lookups;
                totals.time_ps += out.latency.makespan_ps;
            }
        }
    }

    let (oh, ow) = (layer.out_h(), layer.out_w());
    let raw = Array3::from_shape_fn((layer.c_out, oh, ow), |(j, y, x)| carry.wrapped[[y * ow + x, j]]);
    let scales = lut.scales();
    let values = Array3::from_shape_fn((layer.c_out, oh, ow), |(j, y, x)| raw[[j, y, x]] as f64 * scales[j]);
    Ok(LayerOutput { raw, values, overflowed: carry.overflow.iter().filter(|&&o| o).count(), sim })
}

/// Float convolution through the same im2col layout: `patches · W`.
pub fn conv_exact(input: ArrayView3<'_, f64>, layer: &ConvLayerSpec, w: ArrayView2<'_, f64>) -> Result<Array3<f64>> {
    if w.dim() != (layer.patch_cols(), layer.c_out) {
        return dim_err(format!(
            "weight matrix is {:?}, layer needs ({}, {})",
            w.dim(),
            layer.patch_cols(),
            layer.c_out
        ));
    }
    let patches = extract_patches(input, layer)?;
    let y = exact_gemm(patches.view(), w)?;
    let ow = layer.out_w();
    Ok(Array3::from_shape_fn((layer.c_out, layer.out_h(), ow), |(j, r, c)| y[[r * ow + c, j]]))
}
