// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use maddness_sim::VoltagePreset;

#[derive(Debug, Parser)]
#[command(name = "maddness", version = crate::manifest::VERSION, about = "Train, evaluate and simulate LUT-based approximate matrix multiplication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration (TOML); flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed; component seeds are derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn trees and prototypes from sample rows.
    Train(TrainArgs),
    /// Compare approximate and exact products.
    Eval(EvalArgs),
    /// Run the event-driven macro simulator.
    Sim(SimArgs),
    /// Merge simulator metrics files into one table.
    Report(ReportArgs),
    /// Evaluate the toy convolutional network.
    Toy(ToyArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Training rows (CSV or binary f32 matrix).
    #[arg(long)]
    pub data: PathBuf,
    /// Weight matrix to bake into the lookup table.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Number of subspaces.
    #[arg(long)]
    pub subspaces: Option<usize>,
    /// Tree depth; K = 2^levels.
    #[arg(long)]
    pub levels: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Also retrain at K = 4, 8, 16 on `--data` and report the error per K.
    #[arg(long)]
    pub k_sweep: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub preset: Option<VoltagePreset>,
    /// Decoders per block; comma-separated list to sweep.
    #[arg(long, value_delimiter = ',')]
    pub ndec: Option<Vec<usize>>,
    /// Pipeline stages; comma-separated list to sweep.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long)]
    pub ops_per_lookup: Option<u32>,
    /// Number of synthetic inputs when `--data` is not given.
    #[arg(long)]
    pub inputs: Option<usize>,
    /// Trained model with a lookup table; otherwise a seeded random model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Real-valued input rows for `--model`.
    #[arg(long, requires = "model")]
    pub data: Option<PathBuf>,
    /// Write the event trace (CSV) here; sweeps add a per-shape suffix.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Simulations to run in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Metrics JSON files written by `sim`.
    #[arg(required = true)]
    pub metrics: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[command(flatten)]
    pub common: Common,
}
