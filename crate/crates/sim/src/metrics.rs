// SPDX-License-Identifier: Apache-2.0

//! Throughput, efficiency and breakdown reporting.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::area::{area_estimate, AreaEstimate};
use crate::engine::SimOutcome;
use crate::error::{Result, SimError};
use crate::ledger::{Category, CategoryTotals, EnergyLedger, LatencyReport};
use crate::params::SimConfig;

pub const METRICS_SCHEMA_VERSION: u32 = 1;
pub const METRICS_KIND: &str = "maddness-sim-metrics";
pub const DEFAULT_OPS_PER_LOOKUP: u32 = 18;

/// One value per category.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ByCategory {
    pub encoder: f64,
    pub decoder: f64,
    pub pipeline_control: f64,
    pub other: f64,
}

impl ByCategory {
    pub fn from_array(a: [f64; 4]) -> Self {
        Self { encoder: a[0], decoder: a[1], pipeline_control: a[2], other: a[3] }
    }

    pub fn get(&self, cat: Category) -> f64 {
        match cat {
            Category::Encoder => self.encoder,
            Category::Decoder => self.decoder,
            Category::PipelineControl => self.pipeline_control,
            Category::Other => self.other,
        }
    }

    pub fn sum(&self) -> f64 {
        self.encoder + self.decoder + self.pipeline_control + self.other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Steady-state rate (from the output spacing) when more than one input
    /// ran, otherwise the whole-run average.
    pub tops: f64,
    /// Total ops over the makespan, including pipeline fill.
    pub average_tops: f64,
    /// Output rate in MHz.
    pub frequency_mhz: f64,
    pub tops_per_watt: f64,
    pub total_ops: f64,
    pub energy_per_op_fj: f64,
    pub energy_shares: ByCategory,
    pub latency_shares: ByCategory,
}

fn shares(t: &CategoryTotals) -> ByCategory {
    ByCategory::from_array(t.shares())
}

pub fn report_metrics(
    ledger: &EnergyLedger,
    report: &LatencyReport,
    ops_per_lookup: u32,
    total_lookups: u64,
) -> Result<Metrics> {
    if report.makespan_ps.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(SimError::Metrics("run has zero duration".into()));
    }
    let energy = ledger.total_fj();
    if energy.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(SimError::Metrics("run consumed no energy".into()));
    }
    let total_ops = ops_per_lookup as f64 * total_lookups as f64;
    // ops per ps is 1e12 ops/s, i.e. TOPS.
    let average_tops = total_ops / report.makespan_ps;
    let (tops, period) = if report.inputs > 1 && report.initiation_interval_ps > 0.0 {
        (total_ops / report.inputs as f64 / report.initiation_interval_ps, report.initiation_interval_ps)
    } else {
        (average_tops, report.makespan_ps)
    };
    Ok(Metrics {
        tops,
        average_tops,
        frequency_mhz: 1.0e6 / period,
        // ops per fJ is 1e15 ops/J, i.e. 1000 TOPS/W.
        tops_per_watt: 1000.0 * total_ops / energy,
        total_ops,
        energy_per_op_fj: energy / total_ops,
        energy_shares: shares(&ledger.categories),
        latency_shares: shares(&report.categories),
    })
}

/// The full metrics document written by a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub schema_version: u32,
    pub kind: String,
    pub preset: String,
    pub n_dec: usize,
    pub n_s: usize,
    pub ops_per_lookup: u32,
    pub inputs: usize,
    pub lookups: u64,
    pub metrics: Metrics,
    pub energy_fj: ByCategory,
    pub energy_events: [u64; 4],
    pub latency_ps: ByCategory,
    pub makespan_ps: f64,
    pub first_output_ps: f64,
    pub initiation_interval_ps: f64,
    pub overflowed_outputs: usize,
    pub area: AreaEstimate,
    /// `1 / (decoder + encoder fJ/op)` at the preset's reference energies.
    pub anchor_tops_per_watt: f64,
    pub anchor_formula: String,
}

impl SimReport {
    pub fn new(cfg: &SimConfig, outcome: &SimOutcome, ops_per_lookup: u32) -> Result<Self> {
        let metrics = report_metrics(&outcome.energy, &outcome.latency, ops_per_lookup, outcome.lookups)?;
        let r = &cfg.reference;
        Ok(Self {
            schema_version: METRICS_SCHEMA_VERSION,
            kind: METRICS_KIND.into(),
            preset: cfg.voltage_preset.label().into(),
            n_dec: cfg.n_dec,
            n_s: cfg.n_s,
            ops_per_lookup,
            inputs: outcome.latency.inputs,
            lookups: outcome.lookups,
            metrics,
            energy_fj: ByCategory::from_array(outcome.energy.categories.totals),
            energy_events: outcome.energy.categories.counts,
            latency_ps: ByCategory::from_array(outcome.latency.categories.totals),
            makespan_ps: outcome.latency.makespan_ps,
            first_output_ps: outcome.latency.first_output_ps,
            initiation_interval_ps: outcome.latency.initiation_interval_ps,
            overflowed_outputs: outcome.outputs.iter().filter(|o| o.overflow).count(),
            area: area_estimate(cfg),
            anchor_tops_per_watt: r.anchor_tops_per_watt(),
            anchor_formula: format!(
                "1/({} + {}) fJ/op = {:.1} TOPS/W",
                r.decoder_fj_per_op,
                r.encoder_fj_per_op,
                r.anchor_tops_per_watt()
            ),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `category,energy_fj,latency_ps,share,latency_share` with `share` the
    /// energy share.
    pub fn breakdown_csv(&self) -> String {
        let mut out = String::from("category,energy_fj,latency_ps,share,latency_share\n");
        for cat in Category::ALL {
            let _ = writeln!(
                out,
                "{},{:.6},{:.3},{:.9},{:.9}",
                cat,
                self.energy_fj.get(cat),
                self.latency_ps.get(cat),
                self.metrics.energy_shares.get(cat),
                self.metrics.latency_shares.get(cat)
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let m = &self.metrics;
        format!(
            "preset {} n_dec={} n_s={}: {:.4} TOPS at {:.2} MHz, {:.2} TOPS/W (anchor {}), \
             decoder energy share {:.4}, encoder latency share {:.4}, area {:.4} mm2",
            self.preset,
            self.n_dec,
            self.n_s,
            m.tops,
            m.frequency_mhz,
            m.tops_per_watt,
            self.anchor_formula,
            m.energy_shares.decoder,
            m.latency_shares.encoder,
            self.area.total_mm2
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(makespan: f64, ii: f64, inputs: usize) -> LatencyReport {
        LatencyReport { makespan_ps: makespan, initiation_interval_ps: ii, inputs, ..Default::default() }
    }

    #[test]
    fn steady_state_throughput_arithmetic() {
        // 512 lookups per cycle at 56.2 MHz.
        let mut ledger = EnergyLedger::default();
        ledger.log(Category::Decoder, 1.0);
        let ii = 1.0e6 / 56.2;
        let m = report_metrics(&ledger, &report(1000.0 * ii, ii, 1000), 18, 512 * 1000).unwrap();
        assert!((m.tops - 0.5179).abs() < 1e-3, "{}", m.tops);
        assert!((m.frequency_mhz - 56.2).abs() < 1e-9);
    }

    #[test]
    fn efficiency_from_per_op_energy() {
        let mut ledger = EnergyLedger::default();
        ledger.log(Category::Decoder, 5.6 * 1800.0);
        ledger.log(Category::Encoder, 0.054 * 1800.0);
        let m = report_metrics(&ledger, &report(1.0, 0.0, 1), 18, 100).unwrap();
        assert!((m.tops_per_watt - 1000.0 / 5.654).abs() < 1e-9);
        assert!((m.energy_shares.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_category_share() {
        let mut ledger = EnergyLedger::default();
        ledger.log(Category::Other, 2.0);
        let m = report_metrics(&ledger, &report(1.0, 0.0, 1), 18, 1).unwrap();
        assert_eq!(m.energy_shares.other, 1.0);
    }

    #[test]
    fn zero_duration_rejected() {
        let mut ledger = EnergyLedger::default();
        ledger.log(Category::Other, 2.0);
        assert!(report_metrics(&ledger, &report(0.0, 0.0, 1), 18, 1).is_err());
    }
}
