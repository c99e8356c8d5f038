// SPDX-License-Identifier: Apache-2.0

//! One decoder: a 16-row, 8-column SRAM holding one output column's LUT
//! entries for a subspace, read through the read-completion tree.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::params::SimConfig;

pub const DECODER_ROWS: usize = 16;
pub const DECODER_COLS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderRead {
    pub value: i8,
    pub latency_ps: f64,
    pub energy_fj: f64,
}

/// Data-independent read latency including the RCD tree for `cfg.n_dec`.
pub fn decoder_latency(cfg: &SimConfig) -> f64 {
    cfg.timing.t_sram_read + cfg.timing.t_fa + cfg.timing.t_rcd_gate * cfg.rcd_depth() as f64
}

pub fn decoder_energy(cfg: &SimConfig) -> f64 {
    DECODER_COLS as f64 * cfg.energy.e_sram_read_col + cfg.energy.e_fa + cfg.energy.e_latch
}

/// `rows` is the decoder's array content (LUT column for one subspace).
pub fn decoder_read(code: u8, rows: &[i8], cfg: &SimConfig) -> Result<DecoderRead> {
    if code as usize >= DECODER_ROWS || code as usize >= rows.len() {
        return Err(SimError::Fault { time_ps: 0.0, message: format!("decoder row {code} out of range") });
    }
    Ok(DecoderRead { value: rows[code as usize], latency_ps: decoder_latency(cfg), energy_fj: decoder_energy(cfg) })
}
