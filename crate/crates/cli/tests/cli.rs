// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use maddness_core::dataio::write_csv_matrix;
use maddness_core::LearnedModel;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn maddness(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maddness")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Nonnegative rows drawn around a few cluster centres.
fn clustered(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Vec<f64>> = (0..6).map(|_| (0..cols).map(|_| rng.random_range(0.0..4.0)).collect()).collect();
    Array2::from_shape_fn((rows, cols), |(r, c)| (centres[r % 6][c] + rng.random_range(-0.5..0.5)).max(0.0))
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_csv_matrix(&dir.path().join("train.csv"), &clustered(400, 18, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = Array2::from_shape_fn((18, 4), |_| rng.random_range(-1.0..1.0));
        write_csv_matrix(&dir.path().join("w.csv"), &w).unwrap();
        write_csv_matrix(&dir.path().join("w0.csv"), &Array2::zeros((18, 4))).unwrap();
        std::fs::write(dir.path().join("run.toml"), "seed = 5\n[train]\nsubspaces = 2\n").unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        maddness(args, self.dir.path())
    }

    fn train(&self, out: &str) -> Output {
        self.run(&["train", "--config", "run.toml", "--data", "train.csv", "--weights", "w.csv", "--out", out])
    }
}

#[test]
fn train_writes_loadable_model_and_manifest() {
    let f = Fixture::new();
    let o = f.train("m");
    assert!(o.status.success(), "{}", stderr(&o));
    let model = LearnedModel::load(&f.path("m/model.json")).unwrap();
    assert_eq!(model.scheme.m(), 2);
    assert!(model.lut.is_some());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f.path("m/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["seed"], 5);
    assert!(manifest["version"].as_str().unwrap().starts_with('v'));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 1);
}

#[test]
fn training_is_byte_identical_per_seed() {
    let f = Fixture::new();
    assert!(f.train("a").status.success());
    assert!(f.train("b").status.success());
    assert_eq!(std::fs::read(f.path("a/model.json")).unwrap(), std::fs::read(f.path("b/model.json")).unwrap());
    let o = f.run(&["train", "--config", "run.toml", "--data", "train.csv", "--seed", "6", "--out", "c"]);
    assert!(o.status.success());
    assert_ne!(std::fs::read(f.path("a/model.json")).unwrap(), std::fs::read(f.path("c/model.json")).unwrap());
}

#[test]
fn corrupt_csv_reports_line() {
    let f = Fixture::new();
    std::fs::write(f.path("bad.csv"), "1,2,3\n4,5,6\n7,x,9\n").unwrap();
    let o = f.run(&["train", "--data", "bad.csv", "--subspaces", "1", "--out", "m"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn config_and_usage_errors_exit_1() {
    let f = Fixture::new();
    std::fs::write(f.path("bad.toml"), "[train]\nsubspacez = 2\n").unwrap();
    let o = f.run(&["train", "--config", "bad.toml", "--data", "train.csv", "--out", "m"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    // subspaces must divide the dimension
    let o = f.run(&["train", "--data", "train.csv", "--subspaces", "5", "--out", "m"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = f.run(&["train", "--data", "train.csv", "--out", "m"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(f.run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(f.run(&["sim", "--ndec", "four"]).status.code(), Some(1));
    assert_eq!(f.run(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_files_exit_2() {
    let f = Fixture::new();
    let o = f.run(&["eval", "--model", "nope.json", "--weights", "w.csv", "--data", "train.csv", "--out", "e"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(f.run(&["train", "--data", "nope.csv", "--subspaces", "2"]).status.code(), Some(2));
    assert_eq!(f.run(&["train", "--config", "nope.toml", "--data", "train.csv"]).status.code(), Some(2));
    std::fs::write(f.path("junk.json"), "{not json").unwrap();
    let o = f.run(&["eval", "--model", "junk.json", "--weights", "w.csv", "--data", "train.csv", "--out", "e"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).contains("panicked"));
}

#[test]
fn zero_weights_give_zero_error() {
    let f = Fixture::new();
    assert!(f.train("m").status.success());
    let o = f.run(&["eval", "--model", "m/model.json", "--weights", "w0.csv", "--data", "train.csv", "--out", "e"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f.path("e/eval.json")).unwrap()).unwrap();
    let rows = report["results"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r["mse"], 0.0);
        assert_eq!(r["rel_frobenius"], 0.0);
    }
    let csv = std::fs::read_to_string(f.path("e/eval.csv")).unwrap();
    assert!(csv.starts_with("section,encoder,k,mse,rel_frobenius,max_abs\n"));
    assert!(csv.contains("encoder,manhattan,16,0,0,0"));
}

#[test]
fn k_sweep_error_non_increasing() {
    let f = Fixture::new();
    assert!(f.train("m").status.success());
    let o = f.run(&[
        "eval",
        "--model",
        "m/model.json",
        "--weights",
        "w.csv",
        "--data",
        "train.csv",
        "--k-sweep",
        "--out",
        "e",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f.path("e/eval.json")).unwrap()).unwrap();
    let sweep: Vec<(u64, f64)> = report["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["section"] == "k_sweep")
        .map(|r| (r["k"].as_u64().unwrap(), r["rel_frobenius"].as_f64().unwrap()))
        .collect();
    assert_eq!(sweep.iter().map(|s| s.0).collect::<Vec<_>>(), vec![4, 8, 16]);
    assert!(sweep.windows(2).all(|w| w[1].1 <= w[0].1), "{sweep:?}");
}

fn metrics(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn sim_reproduces_efficiency_band_and_trend() {
    let f = Fixture::new();
    let o = f.run(&[
        "sim",
        "--preset",
        "0.5V",
        "--ndec",
        "4,8,16,32",
        "--ns",
        "32",
        "--inputs",
        "300",
        "--jobs",
        "2",
        "--out",
        "s",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m16 = metrics(&f.path("s"), "metrics-0.5V-ndec16-ns32.json");
    let tpw = m16["metrics"]["tops_per_watt"].as_f64().unwrap();
    assert!((168.0..=180.0).contains(&tpw), "{tpw}");
    assert!(m16["metrics"]["energy_shares"]["decoder"].as_f64().unwrap() >= 0.94);
    assert!(m16["anchor_formula"].as_str().unwrap().contains("176.9"));
    let eff: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|n| {
            metrics(&f.path("s"), &format!("metrics-0.5V-ndec{n}-ns32.json"))["metrics"]["tops_per_watt"]
                .as_f64()
                .unwrap()
        })
        .collect();
    let gains: Vec<f64> = eff.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    assert!(gains.iter().all(|&g| g > 0.0), "{eff:?}");
    assert!(gains.windows(2).all(|w| w[1] < w[0]), "{gains:?}");
    assert!(gains[2] <= 0.02);
    let csv = std::fs::read_to_string(f.path("s/metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let bd = std::fs::read_to_string(f.path("s/breakdown-0.5V-ndec16-ns32.csv")).unwrap();
    assert!(bd.starts_with("category,energy_fj,latency_ps,share,latency_share\n"));
}

#[test]
fn sim_outputs_are_deterministic_across_job_counts() {
    let f = Fixture::new();
    for (out, jobs) in [("a", "1"), ("b", "3")] {
        let o = f.run(&[
            "sim", "--ndec", "1,4", "--ns", "1,4", "--inputs", "50", "--seed", "9", "--jobs", jobs, "--out", out,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for n in [1, 4] {
        for s in [1, 4] {
            let name = format!("metrics-0.5V-ndec{n}-ns{s}.json");
            assert_eq!(
                std::fs::read(f.path("a").join(&name)).unwrap(),
                std::fs::read(f.path("b").join(&name)).unwrap()
            );
        }
    }
    assert_eq!(std::fs::read(f.path("a/metrics.csv")).unwrap(), std::fs::read(f.path("b/metrics.csv")).unwrap());
}

#[test]
fn sim_with_trained_model_and_trace() {
    let f = Fixture::new();
    std::fs::write(f.path("m4.toml"), "[train]\nsubspaces = 2\nlevels = 4\n").unwrap();
    let o = f.run(&["train", "--config", "m4.toml", "--data", "train.csv", "--weights", "w.csv", "--out", "m"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = f.run(&["sim", "--model", "m/model.json", "--data", "train.csv", "--trace", "t.csv", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = metrics(&f.path("s"), "metrics-0.5V-ndec4-ns2.json");
    assert_eq!(m["inputs"], 400);
    let trace = std::fs::read_to_string(f.path("t.csv")).unwrap();
    assert!(trace.starts_with("timestamp_ps,block,unit,event_kind,energy_fj\n"));
    // shape must match the model
    let o = f.run(&["sim", "--model", "m/model.json", "--ndec", "16", "--out", "s2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn report_merges_and_checks_versions() {
    let f = Fixture::new();
    let o = f.run(&["sim", "--ndec", "4,16", "--ns", "8", "--inputs", "40", "--out", "s"]);
    assert!(o.status.success());
    let a = "s/metrics-0.5V-ndec4-ns8.json";
    let b = "s/metrics-0.5V-ndec16-ns8.json";

    assert!(f.run(&["report", a, "--out", "r1"]).status.success());
    let one = std::fs::read_to_string(f.path("r1/report.csv")).unwrap();
    assert_eq!(one.lines().count(), 2);
    assert!(one.lines().nth(1).unwrap().starts_with("4,8,0.5V,40,"));
    let merged: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f.path("r1/report.json")).unwrap()).unwrap();
    assert_eq!(merged[0], metrics(f.dir.path(), a));

    assert!(f.run(&["report", b, a, "--out", "r2"]).status.success());
    let two = std::fs::read_to_string(f.path("r2/report.csv")).unwrap();
    let keys: Vec<&str> = two.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(keys, vec!["4", "16"]);

    let text =
        std::fs::read_to_string(f.path(b)).unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
    std::fs::write(f.path("v2.json"), text).unwrap();
    let o = f.run(&["report", a, "v2.json", "--out", "r3"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!f.path("r3/report.csv").exists());
}

#[test]
fn toy_command_writes_report() {
    let f = Fixture::new();
    std::fs::write(f.path("toy.toml"), "[toy]\ntrain_per_class = 10\ntest_per_class = 5\n").unwrap();
    let o = f.run(&["toy", "--config", "toy.toml", "--seed", "3", "--out", "t"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(f.path("t/toy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("k,levels,accuracy,float_accuracy,delta\n"));
}
