// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use maddness_core::{evaluate_encoder, nested_k_sweep, EncoderKind, ErrorReport, LearnedModel, TrainingConfig};
use serde::{Deserialize, Serialize};

use super::{csv_float, load_config, read_data, seed};
use crate::args::EvalArgs;
use crate::error::{CliError, Result};
use crate::manifest::OutputSet;

pub const DEFAULT_SWEEP_LEVELS: [u32; 3] = [2, 3, 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    /// `encoder` for the per-encoder table, `k_sweep` for retrained models.
    pub section: String,
    pub encoder: String,
    pub k: usize,
    #[serde(flatten)]
    pub error: ErrorReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: usize,
    pub n_out: usize,
    pub results: Vec<EvalRow>,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("section,encoder,k,mse,rel_frobenius,max_abs\n");
        for r in &self.results {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.section,
                r.encoder,
                r.k,
                csv_float(r.error.mse),
                csv_float(r.error.rel_frobenius),
                csv_float(r.error.max_abs)
            );
        }
        s
    }
}

pub fn run(args: &EvalArgs) -> Result<EvalReport> {
    let cfg = load_config(&args.common)?;
    let seed = seed(&args.common, &cfg);
    let model = LearnedModel::load(&args.model).map_err(|e| CliError::from_amm(&args.model, e))?;
    let w = read_data(&args.weights)?;
    let x = read_data(&args.data)?;
    let data_err = |e| CliError::Data(format!("evaluation: {e}"));

    let mut results = Vec::new();
    for kind in [EncoderKind::Bdt, EncoderKind::Manhattan, EncoderKind::Euclidean] {
        let error = evaluate_encoder(kind, x.view(), &model, w.view()).map_err(data_err)?;
        results.push(EvalRow { section: "encoder".into(), encoder: kind.name().into(), k: model.k(), error });
    }
    if args.k_sweep {
        let levels = cfg.eval.k_sweep_levels.clone().unwrap_or(DEFAULT_SWEEP_LEVELS.to_vec());
        let mut tc = TrainingConfig::new(model.scheme.m(), model.seed, x.clone());
        tc.act_scale = Some(model.act_scale);
        tc.max_samples = cfg.train.max_samples;
        for (k, error) in nested_k_sweep(&tc, &levels, x.view(), w.view()).map_err(data_err)? {
            results.push(EvalRow { section: "k_sweep".into(), encoder: EncoderKind::Bdt.name().into(), k, error });
        }
    }
    let report = EvalReport { rows: x.nrows(), n_out: w.ncols(), results };

    let mut out = OutputSet::create(&args.common.out)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    out.write("eval.json", (json + "\n").as_bytes())?;
    out.write("eval.csv", report.to_csv().as_bytes())?;
    out.finish("eval", args.common.config.as_deref(), seed)?;
    Ok(report)
}
