// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use maddness_cnn::{toy_network_eval, ToyConfig, ToyReport};

use super::{csv_float, load_config, seed};
use crate::args::ToyArgs;
use crate::error::{CliError, Result};
use crate::manifest::OutputSet;

pub fn toy_csv(report: &ToyReport) -> String {
    let mut s = String::from("k,levels,accuracy,float_accuracy,delta\n");
    for e in &report.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.k,
            e.levels,
            csv_float(e.accuracy),
            csv_float(report.float_accuracy),
            csv_float(e.delta)
        );
    }
    s
}

pub fn run(args: &ToyArgs) -> Result<ToyReport> {
    let cfg = load_config(&args.common)?;
    let seed = seed(&args.common, &cfg);
    let d = ToyConfig::default();
    let t = &cfg.toy;
    let toy = ToyConfig {
        seed,
        train_per_class: t.train_per_class.unwrap_or(d.train_per_class),
        test_per_class: t.test_per_class.unwrap_or(d.test_per_class),
        noise: t.noise.unwrap_or(d.noise),
        levels: t.levels.clone().unwrap_or(d.levels),
        max_samples: d.max_samples,
        ridge: t.ridge.unwrap_or(d.ridge),
    };
    let report = toy_network_eval(&toy)?;
    let mut out = OutputSet::create(&args.common.out)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    out.write("toy.json", (json + "\n").as_bytes())?;
    out.write("toy.csv", toy_csv(&report).as_bytes())?;
    out.finish("toy", args.common.config.as_deref(), seed)?;
    println!(
        "float accuracy {:.3}; {}",
        report.float_accuracy,
        report.entries.iter().map(|e| format!("K={} {:.3}", e.k, e.accuracy)).collect::<Vec<_>>().join(", ")
    );
    Ok(report)
}
