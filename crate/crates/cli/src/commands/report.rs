// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::PathBuf;

use maddness_sim::metrics::{METRICS_KIND, METRICS_SCHEMA_VERSION};
use maddness_sim::SimReport;

use super::{csv_float, load_config, seed};
use crate::args::ReportArgs;
use crate::error::{CliError, Result};
use crate::manifest::OutputSet;

pub const REPORT_HEADER: &str = "n_dec,n_s,preset,inputs,tops,average_tops,frequency_mhz,tops_per_watt,\
energy_per_op_fj,decoder_energy_share,encoder_energy_share,encoder_latency_share,area_mm2,decoder_area_share,\
anchor_tops_per_watt";

/// One row per report, ordered by `(n_dec, n_s, preset)`.
pub fn merged_csv(reports: &[SimReport]) -> String {
    let mut sorted: Vec<&SimReport> = reports.iter().collect();
    sorted.sort_by(|a, b| (a.n_dec, a.n_s, &a.preset).cmp(&(b.n_dec, b.n_s, &b.preset)));
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in sorted {
        let m = &r.metrics;
        let row = [
            r.n_dec.to_string(),
            r.n_s.to_string(),
            r.preset.clone(),
            r.inputs.to_string(),
            csv_float(m.tops),
            csv_float(m.average_tops),
            csv_float(m.frequency_mhz),
            csv_float(m.tops_per_watt),
            csv_float(m.energy_per_op_fj),
            csv_float(m.energy_shares.decoder),
            csv_float(m.energy_shares.encoder),
            csv_float(m.latency_shares.encoder),
            csv_float(r.area.total_mm2),
            csv_float(r.area.decoder_share()),
            csv_float(r.anchor_tops_per_watt),
        ];
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

fn read_report(path: &PathBuf) -> Result<SimReport> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let version = value.get("schema_version").and_then(serde_json::Value::as_u64);
    if version != Some(u64::from(METRICS_SCHEMA_VERSION)) {
        return Err(CliError::Config(format!(
            "{}: schema_version {} is not supported (expected {METRICS_SCHEMA_VERSION})",
            path.display(),
            version.map_or("missing".to_string(), |v| v.to_string())
        )));
    }
    if value.get("kind").and_then(serde_json::Value::as_str) != Some(METRICS_KIND) {
        return Err(CliError::Data(format!("{}: not a simulator metrics file", path.display())));
    }
    serde_json::from_value(value).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn run(args: &ReportArgs) -> Result<Vec<SimReport>> {
    let cfg = load_config(&args.common)?;
    let seed = seed(&args.common, &cfg);
    let mut versions = Vec::new();
    for path in &args.metrics {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        versions.push(v.get("schema_version").and_then(serde_json::Value::as_u64));
    }
    if versions.windows(2).any(|w| w[0] != w[1]) {
        return Err(CliError::Config(format!("metrics files mix schema versions {versions:?}")));
    }
    let reports = args.metrics.iter().map(read_report).collect::<Result<Vec<_>>>()?;

    let mut out = OutputSet::create(&args.common.out)?;
    out.write("report.csv", merged_csv(&reports).as_bytes())?;
    let json = serde_json::to_string_pretty(&reports).map_err(|e| CliError::Data(e.to_string()))?;
    out.write("report.json", (json + "\n").as_bytes())?;
    out.finish("report", args.common.config.as_deref(), seed)?;
    Ok(reports)
}
