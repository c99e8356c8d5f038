// SPDX-License-Identifier: Apache-2.0

//! Linear area model of the macro.

use serde::{Deserialize, Serialize};

use crate::params::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    pub total_mm2: f64,
    /// All `n_dec × n_s` decoders.
    pub decoder_mm2: f64,
    pub encoder_mm2: f64,
    /// Per-block controllers.
    pub control_mm2: f64,
    /// Output columns and global periphery.
    pub other_mm2: f64,
}

impl AreaEstimate {
    pub fn decoder_share(&self) -> f64 {
        self.decoder_mm2 / self.total_mm2
    }

    /// Shares in category order encoder, decoder, control, other.
    pub fn shares(&self) -> [f64; 4] {
        [self.encoder_mm2, self.decoder_mm2, self.control_mm2, self.other_mm2].map(|a| a / self.total_mm2)
    }
}

const UM2_PER_MM2: f64 = 1.0e6;

pub fn area_estimate(cfg: &SimConfig) -> AreaEstimate {
    let a = &cfg.area;
    let (nd, ns) = (cfg.n_dec as f64, cfg.n_s as f64);
    let decoder = a.a_dec * nd * ns;
    let encoder = a.a_enc * ns;
    let control = a.a_ctrl * ns;
    let other = a.a_out * nd + a.a_global;
    AreaEstimate {
        total_mm2: (decoder + encoder + control + other) / UM2_PER_MM2,
        decoder_mm2: decoder / UM2_PER_MM2,
        encoder_mm2: encoder / UM2_PER_MM2,
        control_mm2: control / UM2_PER_MM2,
        other_mm2: other / UM2_PER_MM2,
    }
}
