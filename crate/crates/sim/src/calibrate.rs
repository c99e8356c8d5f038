// SPDX-License-Identifier: Apache-2.0

//! Least-squares fit of the timing constants to block-rate and
//! latency-share targets.
//!
//! Encoder latency is `E = levels × (stages × t_dlc_stage + t_mux)`, with
//! one stage per DLC in the best case and eight in the worst. The rest of a
//! block's path is `R = D + 4 × t_hs_phase` with decoder latency
//! `D = t_sram_read + t_fa + depth × t_rcd_gate`. The fit assumes the
//! encoder-bound regime `D <= E` (checked afterwards), where the block rate
//! is `1 / E` and the encoder latency share is `E / (E + R)`. Each target is
//! one linear equation in `(t_dlc_stage, t_mux, R)` scaled by its interval;
//! the system is solved in the least-squares sense and `t_sram_read` takes
//! whatever of `R` the fixed priors leave.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::params::{ceil_log2, TimingParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub best_mhz: f64,
    pub worst_mhz: f64,
    /// Encoder share of the block cycle in the best case.
    pub encoder_share_best: f64,
    pub encoder_share_worst: f64,
}

/// Constants held fixed during the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPriors {
    pub t_fa: f64,
    pub t_rcd_gate: f64,
    pub t_hs_phase: f64,
    /// Decoders per block at the calibration point.
    pub n_dec: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub timing: TimingParams,
    /// Fitted block remainder `R` in ps.
    pub remainder_ps: f64,
    /// Relative residual of each target equation.
    pub residuals: [f64; 4],
}

const LEVELS: f64 = 4.0;
const WORST_STAGES: f64 = 8.0;

pub fn calibrate_timing(t: &CalibrationTargets, p: &CalibrationPriors) -> Result<CalibrationResult> {
    let all = [t.best_mhz, t.worst_mhz, t.encoder_share_best, t.encoder_share_worst];
    if all.iter().any(|v| !v.is_finite() || *v <= 0.0) || t.best_mhz <= t.worst_mhz {
        return Err(SimError::Config(format!("unusable calibration targets {t:?}")));
    }
    let ii_best = 1.0e6 / t.best_mhz;
    let ii_worst = 1.0e6 / t.worst_mhz;
    let (sb, sw) = (t.encoder_share_best, t.encoder_share_worst);
    // E(1 - s)/s - R = 0 for each share target.
    let (kb, kw) = ((1.0 - sb) / sb, (1.0 - sw) / sw);
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(
        4,
        3,
        &[
            LEVELS / ii_best, LEVELS / ii_best, 0.0,
            LEVELS * WORST_STAGES / ii_worst, LEVELS / ii_worst, 0.0,
            LEVELS * kb / ii_best, LEVELS * kb / ii_best, -1.0 / ii_best,
            LEVELS * WORST_STAGES * kw / ii_worst, LEVELS * kw / ii_worst, -1.0 / ii_worst,
        ],
    );
    let b = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| SimError::Config(format!("calibration solve failed: {e}")))?;
    let (t_dlc_stage, t_mux, remainder) = (x[0], x[1], x[2]);
    let depth = 3.0 + ceil_log2(p.n_dec) as f64;
    let decoder = remainder - 4.0 * p.t_hs_phase;
    let t_sram_read = decoder - p.t_fa - depth * p.t_rcd_gate;
    if t_dlc_stage < 0.0 || t_mux < 0.0 || t_sram_read < 0.0 {
        return Err(SimError::Config(format!(
            "calibration gives negative constants (t_dlc_stage={t_dlc_stage:.3}, t_mux={t_mux:.3}, t_sram_read={t_sram_read:.3})"
        )));
    }
    let best_encoder = LEVELS * (t_dlc_stage + t_mux);
    if decoder > best_encoder || 4.0 * p.t_hs_phase > best_encoder {
        return Err(SimError::Config(format!(
            "fit leaves the encoder-bound regime (decoder {decoder:.1} ps, best-case encoder {best_encoder:.1} ps)"
        )));
    }
    let r = &a * &x - &b;
    Ok(CalibrationResult {
        timing: TimingParams {
            t_dlc_stage,
            t_mux,
            t_sram_read,
            t_fa: p.t_fa,
            t_rcd_gate: p.t_rcd_gate,
            t_hs_phase: p.t_hs_phase,
        },
        remainder_ps: remainder,
        residuals: [r[0], r[1], r[2], r[3]],
    })
}

/// The targets and priors the shipped presets were fitted with.
pub fn preset_targets(preset: crate::params::VoltagePreset) -> (CalibrationTargets, CalibrationPriors) {
    use crate::params::VoltagePreset::*;
    match preset {
        V0p5 => (
            CalibrationTargets { best_mhz: 56.2, worst_mhz: 31.2, encoder_share_best: 0.54, encoder_share_worst: 0.68 },
            CalibrationPriors { t_fa: 150.0, t_rcd_gate: 60.0, t_hs_phase: 250.0, n_dec: 16 },
        ),
        V0p8 => (
            CalibrationTargets {
                best_mhz: 353.0,
                worst_mhz: 144.0,
                encoder_share_best: 0.49,
                encoder_share_worst: 0.70,
            },
            CalibrationPriors { t_fa: 40.0, t_rcd_gate: 15.0, t_hs_phase: 60.0, n_dec: 16 },
        ),
    }
}
