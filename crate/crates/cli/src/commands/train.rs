// SPDX-License-Identifier: Apache-2.0

use maddness_core::seed::derive_seed;
use maddness_core::{train_model, LearnedModel, TrainingConfig};

use super::{load_config, read_data, seed};
use crate::args::TrainArgs;
use crate::error::{CliError, Result};
use crate::manifest::OutputSet;

pub const MODEL_FILE: &str = "model.json";

pub fn run(args: &TrainArgs) -> Result<LearnedModel> {
    let cfg = load_config(&args.common)?;
    let seed = seed(&args.common, &cfg);
    let m = args
        .subspaces
        .or(cfg.train.subspaces)
        .ok_or_else(|| CliError::Config("number of subspaces not set ([train] subspaces or --subspaces)".into()))?;
    let samples = read_data(&args.data)?;
    let weights = args.weights.as_deref().map(read_data).transpose()?;

    let mut tc = TrainingConfig::new(m, derive_seed(seed, "train"), samples);
    if let Some(l) = args.levels.or(cfg.train.levels) {
        tc = tc.with_levels(l);
    }
    tc.max_samples = cfg.train.max_samples;
    tc.act_scale = cfg.train.act_scale;
    let mut model = train_model(&tc).map_err(|e| CliError::Config(format!("training: {e}")))?;
    if let (Some(w), Some(path)) = (weights, args.weights.as_deref()) {
        model.attach_weights(w.view()).map_err(|e| CliError::from_amm(path, e))?;
    }

    let mut out = OutputSet::create(&args.common.out)?;
    let json = model.to_json().map_err(|e| CliError::Data(e.to_string()))?;
    out.write(MODEL_FILE, (json + "\n").as_bytes())?;
    out.finish("train", args.common.config.as_deref(), seed)?;
    Ok(model)
}
