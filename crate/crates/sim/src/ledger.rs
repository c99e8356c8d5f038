// SPDX-License-Identifier: Apache-2.0

//! Energy and latency accounting by category.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Encoder,
    Decoder,
    PipelineControl,
    Other,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Encoder, Category::Decoder, Category::PipelineControl, Category::Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Encoder => "encoder",
            Category::Decoder => "decoder",
            Category::PipelineControl => "pipeline_control",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-category totals and event counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryTotals {
    pub totals: [f64; 4],
    pub counts: [u64; 4],
}

impl CategoryTotals {
    pub fn log(&mut self, cat: Category, amount: f64) {
        self.totals[cat.index()] += amount;
        self.counts[cat.index()] += 1;
    }

    pub fn total(&self, cat: Category) -> f64 {
        self.totals[cat.index()]
    }

    pub fn count(&self, cat: Category) -> u64 {
        self.counts[cat.index()]
    }

    pub fn grand_total(&self) -> f64 {
        self.totals.iter().sum()
    }

    /// Shares of the grand total; all zero when nothing was logged.
    pub fn shares(&self) -> [f64; 4] {
        let g = self.grand_total();
        if g <= 0.0 {
            return [0.0; 4];
        }
        self.totals.map(|t| t / g)
    }

    pub fn share(&self, cat: Category) -> f64 {
        self.shares()[cat.index()]
    }

    pub fn merge(&mut self, other: &CategoryTotals) {
        for i in 0..4 {
            self.totals[i] += other.totals[i];
            self.counts[i] += other.counts[i];
        }
    }
}

/// Energy in femtojoules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub categories: CategoryTotals,
}

impl EnergyLedger {
    pub fn log(&mut self, cat: Category, fj: f64) {
        self.categories.log(cat, fj);
    }

    pub fn total_fj(&self) -> f64 {
        self.categories.grand_total()
    }
}

/// Critical-path time attributed per category plus run-level timing, in ps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub categories: CategoryTotals,
    /// Time of the last output.
    pub makespan_ps: f64,
    /// Time of the first output.
    pub first_output_ps: f64,
    /// Mean spacing between consecutive outputs (0 for a single input).
    pub initiation_interval_ps: f64,
    pub inputs: usize,
}

impl LatencyReport {
    pub fn log(&mut self, cat: Category, ps: f64) {
        self.categories.log(cat, ps);
    }
}
