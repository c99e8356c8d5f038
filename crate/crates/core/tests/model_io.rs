// SPDX-License-Identifier: Apache-2.0

use maddness_core::dataio::{read_matrix, write_csv_matrix, write_f32_matrix};
use maddness_core::{train_model, EncoderKind, LearnedModel, TrainingConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn samples(seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((300, 18), |_| rng.random_range(0.0..2.0))
}

#[test]
fn trained_model_survives_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let mut model = train_model(&TrainingConfig::new(2, 5, samples(1))).unwrap();
    let w = Array2::from_shape_fn((18, 3), |(r, c)| ((r + c) % 5) as f64 - 2.0);
    model.attach_weights(w.view()).unwrap();
    model.save(&path).unwrap();
    let loaded = LearnedModel::load(&path).unwrap();
    assert_eq!(loaded, model);
    let x = samples(2);
    assert_eq!(
        loaded.approx_matmul(x.view(), EncoderKind::Bdt).unwrap(),
        model.approx_matmul(x.view(), EncoderKind::Bdt).unwrap()
    );
}

#[test]
fn training_is_deterministic() {
    let a = train_model(&TrainingConfig::new(3, 9, samples(3)).with_levels(4)).unwrap();
    let b = train_model(&TrainingConfig::new(3, 9, samples(3)).with_levels(4)).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn csv_and_binary_matrices_agree() {
    let dir = tempfile::tempdir().unwrap();
    let x = samples(4).mapv(|v| (v * 64.0).round() / 64.0);
    let csv = dir.path().join("x.csv");
    let bin = dir.path().join("x.f32");
    write_csv_matrix(&csv, &x).unwrap();
    write_f32_matrix(&bin, &x).unwrap();
    assert_eq!(read_matrix(&csv).unwrap(), x);
    assert_eq!(read_matrix(&bin).unwrap(), x);
}
