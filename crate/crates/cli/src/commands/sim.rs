// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use maddness_core::seed::derive_seed;
use maddness_core::LearnedModel;
use maddness_sim::synth::{random_inputs, random_model, PATCH_DIM};
use maddness_sim::{simulate, trace_text, SimConfig, SimOptions, SimReport, DEFAULT_OPS_PER_LOOKUP};
use ndarray::Array2;
use rayon::prelude::*;

use super::report::merged_csv;
use super::{load_config, read_data, seed};
use crate::args::SimArgs;
use crate::error::{CliError, Result};
use crate::manifest::{write_atomic, OutputSet};

pub const DEFAULT_INPUTS: usize = 1000;

fn shape_tag(cfg: &SimConfig) -> String {
    format!("{}-ndec{}-ns{}", cfg.voltage_preset.label(), cfg.n_dec, cfg.n_s)
}

fn trace_path(base: &Path, tag: &str, sweep: bool) -> PathBuf {
    if !sweep {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{tag}.{ext}"),
        None => format!("{stem}-{tag}"),
    };
    base.with_file_name(name)
}

struct Job {
    cfg: SimConfig,
    model: LearnedModel,
    inputs: Array2<u8>,
}

struct Done {
    report: SimReport,
    trace: Option<String>,
}

fn run_job(job: &Job, ops: u32, trace: bool) -> Result<Done> {
    let opts = SimOptions { trace, ..SimOptions::default() };
    let outcome = simulate(job.inputs.view(), &job.model, &job.cfg, &opts)?;
    let report = SimReport::new(&job.cfg, &outcome, ops)?;
    Ok(Done { report, trace: trace.then(|| trace_text(&outcome.trace)) })
}

pub fn run(args: &SimArgs) -> Result<Vec<SimReport>> {
    let cfg = load_config(&args.common)?;
    let seed = seed(&args.common, &cfg);
    let ops = args.ops_per_lookup.or(cfg.sim.ops_per_lookup).unwrap_or(DEFAULT_OPS_PER_LOOKUP);
    if ops == 0 {
        return Err(CliError::Usage("--ops-per-lookup must be at least 1".into()));
    }
    let jobs_n = args.jobs.or(cfg.sim.jobs).unwrap_or(1);
    if jobs_n == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let n_inputs = args.inputs.or(cfg.sim.inputs).unwrap_or(DEFAULT_INPUTS);

    let model =
        args.model.as_deref().map(|p| LearnedModel::load(p).map_err(|e| CliError::from_amm(p, e))).transpose()?;
    let shape_default = |v: usize| vec![v];
    let (ndec_default, ns_default) = match &model {
        Some(m) => (m.lut.as_ref().map_or(16, |l| l.n_out()), m.scheme.m()),
        None => (16, 32),
    };
    let ndecs = args.ndec.clone().or(cfg.sim.ndec.clone()).unwrap_or_else(|| shape_default(ndec_default));
    let nss = args.ns.clone().or(cfg.sim.ns.clone()).unwrap_or_else(|| shape_default(ns_default));
    if ndecs.is_empty() || nss.is_empty() {
        return Err(CliError::Usage("empty --ndec or --ns list".into()));
    }

    let supplied = match (&model, args.data.as_deref()) {
        (Some(m), Some(path)) => Some(m.quantize(read_data(path)?.view()).map_err(|e| CliError::from_amm(path, e))?),
        _ => None,
    };

    let mut jobs = Vec::new();
    for &n_dec in &ndecs {
        for &n_s in &nss {
            let sc = cfg.sim_config(args.preset, n_dec, n_s)?;
            let tag = format!("{n_dec}x{n_s}");
            let (m, x) = match &model {
                Some(m) => {
                    let x = match &supplied {
                        Some(x) => x.clone(),
                        None => random_inputs(n_inputs, m.scheme.d(), derive_seed(seed, &format!("sim-inputs-{tag}"))),
                    };
                    (m.clone(), x)
                }
                None => (
                    random_model(&sc, PATCH_DIM, derive_seed(seed, &format!("sim-model-{tag}")))?,
                    random_inputs(n_inputs, n_s * PATCH_DIM, derive_seed(seed, &format!("sim-inputs-{tag}"))),
                ),
            };
            maddness_sim::engine::check_model(&m, &sc)?;
            jobs.push(Job { cfg: sc, model: m, inputs: x });
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs_n)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let want_trace = args.trace.is_some();
    let done: Vec<Result<Done>> = pool.install(|| jobs.par_iter().map(|j| run_job(j, ops, want_trace)).collect());

    let mut out = OutputSet::create(&args.common.out)?;
    let sweep = jobs.len() > 1;
    let mut reports = Vec::with_capacity(done.len());
    for (job, d) in jobs.iter().zip(done) {
        let d = d?;
        let tag = shape_tag(&job.cfg);
        let json = d.report.to_json()?;
        out.write(&format!("metrics-{tag}.json"), (json + "\n").as_bytes())?;
        out.write(&format!("breakdown-{tag}.csv"), d.report.breakdown_csv().as_bytes())?;
        if let (Some(base), Some(text)) = (args.trace.as_deref(), d.trace) {
            let path = trace_path(base, &tag, sweep);
            write_atomic(&path, text.as_bytes())?;
            out.record(path);
        }
        println!("{}", d.report.summary());
        reports.push(d.report);
    }
    out.write("metrics.csv", merged_csv(&reports).as_bytes())?;
    out.finish("sim", args.common.config.as_deref(), seed)?;
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_names() {
        let base = Path::new("/tmp/t.csv");
        assert_eq!(trace_path(base, "x", false), base);
        assert_eq!(trace_path(base, "0.5V-ndec4-ns32", true), Path::new("/tmp/t-0.5V-ndec4-ns32.csv"));
    }
}
