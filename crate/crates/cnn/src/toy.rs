// SPDX-License-Identifier: Apache-2.0

//! End-to-end check on a small synthetic classification task: random
//! convolution features with a ridge-regression head, evaluated with float
//! convolutions and with every convolution replaced by a trained AMM layer.

use maddness_core::seed::derive_seed;
use maddness_core::{train_model, LearnedModel, TrainingConfig};
use nalgebra::DMatrix;
use ndarray::{concatenate, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetConfig, LabelledImages, SyntheticDataset};
use crate::error::{CnnError, Result};
use crate::layer::PATCH_LEN;
use crate::network::{max_pool, relu, ConvEngine, Network, NetworkSpec, ResolvedLayer};
use crate::patches::extract_patches;
use crate::run::{conv_exact, Backend};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub seed: u64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub noise: f64,
    /// Tree depths to evaluate; `K = 2^levels`.
    pub levels: Vec<u32>,
    /// Per-subspace cap on AMM training rows.
    pub max_samples: Option<usize>,
    /// Ridge penalty for the linear head.
    pub ridge: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            train_per_class: 40,
            test_per_class: 20,
            noise: 0.3,
            levels: vec![2, 3, 4],
            max_samples: Some(8192),
            ridge: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyEntry {
    pub levels: u32,
    pub k: usize,
    pub accuracy: f64,
    /// `accuracy - float_accuracy`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyReport {
    pub seed: u64,
    pub train_images: usize,
    pub test_images: usize,
    pub float_accuracy: f64,
    /// Accuracy with every convolution on the exact path.
    pub bypass_accuracy: f64,
    pub entries: Vec<ToyEntry>,
}

impl ToyReport {
    pub fn entry(&self, k: usize) -> Option<&ToyEntry> {
        self.entries.iter().find(|e| e.k == k)
    }
}

/// He-initialised random convolution weights, one matrix per convolution.
pub fn random_conv_weights(spec: &NetworkSpec, seed: u64) -> Result<Vec<Array2<f64>>> {
    spec.conv_layers()?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let fan_in = (l.c_in * PATCH_LEN) as f64;
            let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).map_err(|e| CnnError::Numeric(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("conv-{i}")));
            Ok(Array2::from_shape_fn((l.c_in * PATCH_LEN, l.c_out), |_| normal.sample(&mut rng)))
        })
        .collect()
}

/// Solve `(FᵀF + λI) β = FᵀY` with a bias column appended to `features`
/// (not penalised). Returns `(p + 1) × classes`.
pub fn ridge_head(features: &Array2<f64>, labels: &[usize], classes: usize, ridge: f64) -> Result<Array2<f64>> {
    let (n, p) = features.dim();
    let f = DMatrix::from_fn(n, p + 1, |i, j| if j < p { features[[i, j]] } else { 1.0 });
    let y = DMatrix::from_fn(n, classes, |i, c| if labels[i] == c { 1.0 } else { 0.0 });
    let mut gram = f.transpose() * &f;
    for j in 0..p {
        gram[(j, j)] += ridge;
    }
    let rhs = f.transpose() * y;
    let chol = gram.cholesky().ok_or_else(|| CnnError::Numeric("ridge system is not positive definite".into()))?;
    let beta = chol.solve(&rhs);
    Ok(Array2::from_shape_fn((p + 1, classes), |(i, c)| beta[(i, c)]))
}

fn feature_matrix(net: &Network, data: &LabelledImages, engines: &[ConvEngine<'_>]) -> Result<Array2<f64>> {
    let rows = (0..data.len()).map(|i| net.features(data.image(i), engines)).collect::<Result<Vec<_>>>()?;
    let p = rows.first().map_or(0, |r| r.len());
    let mut out = Array2::zeros((rows.len(), p));
    for (mut dst, r) in out.rows_mut().into_iter().zip(rows) {
        dst.assign(&r);
    }
    Ok(out)
}

pub fn accuracy(net: &Network, data: &LabelledImages, engines: &[ConvEngine<'_>]) -> Result<f64> {
    let mut hits = 0usize;
    for i in 0..data.len() {
        hits += usize::from(net.classify(data.image(i), engines)? == data.labels[i]);
    }
    Ok(hits as f64 / data.len().max(1) as f64)
}

/// Patch rows seen by each convolution when the float network runs over
/// `data`.
pub fn conv_inputs(net: &Network, data: &LabelledImages) -> Result<Vec<Array2<f64>>> {
    let layers = net.spec.resolve()?;
    let n_conv = net.conv_weights.len();
    let mut per_layer: Vec<Vec<Array2<f64>>> = vec![Vec::with_capacity(data.len()); n_conv];
    for i in 0..data.len() {
        let mut x = data.image(i).to_owned();
        let mut conv = 0;
        for layer in &layers {
            match layer {
                ResolvedLayer::Conv { spec, .. } => {
                    per_layer[conv].push(extract_patches(x.view(), spec)?);
                    x = conv_exact(x.view(), spec, net.conv_weights[conv].view())?;
                    conv += 1;
                }
                ResolvedLayer::Relu => relu(&mut x),
                ResolvedLayer::MaxPool { size } => x = max_pool(x.view(), *size),
                ResolvedLayer::Linear { .. } => break,
            }
        }
    }
    per_layer
        .into_iter()
        .map(|blocks| {
            let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
            concatenate(Axis(0), &views).map_err(|e| CnnError::Dimension(e.to_string()))
        })
        .collect()
}

/// Train one AMM model per convolution at the given depth.
pub fn train_conv_models(
    net: &Network,
    inputs: &[Array2<f64>],
    levels: u32,
    seed: u64,
    max_samples: Option<usize>,
) -> Result<Vec<LearnedModel>> {
    let convs = net.spec.conv_layers()?;
    convs
        .iter()
        .zip(inputs)
        .enumerate()
        .map(|(i, (layer, x))| {
            let mut cfg = TrainingConfig::new(layer.c_in, derive_seed(seed, &format!("amm-{i}-l{levels}")), x.clone())
                .with_levels(levels);
            cfg.max_samples = max_samples;
            let mut model = train_model(&cfg)?;
            model.attach_weights(net.conv_weights[i].view())?;
            Ok(model)
        })
        .collect()
}

/// Generate the dataset and fit the head of the float network.
pub fn build_toy(cfg: &ToyConfig) -> Result<(SyntheticDataset, Network)> {
    let spec = NetworkSpec::toy();
    let dataset = SyntheticDataset::generate(DatasetConfig {
        train_per_class: cfg.train_per_class,
        test_per_class: cfg.test_per_class,
        noise: cfg.noise,
        seed: derive_seed(cfg.seed, "toy-dataset"),
        shape: spec.input,
        ..DatasetConfig::default()
    })?;
    let weights = random_conv_weights(&spec, derive_seed(cfg.seed, "toy-weights"))?;
    let (features_len, classes) = match spec.resolve()?.last() {
        Some(ResolvedLayer::Linear { features, out }) => (*features, *out),
        _ => return Err(CnnError::Network("network must end in a linear layer".into())),
    };
    let placeholder = Array2::zeros((features_len + 1, classes));
    let mut net = Network::new(spec, weights, placeholder)?;
    let feats = feature_matrix(&net, &dataset.train, &[])?;
    net.head = ridge_head(&feats, &dataset.train.labels, classes, cfg.ridge)?;
    Ok((dataset, net))
}

/// Float accuracy against AMM accuracy for each configured depth.
pub fn toy_network_eval(cfg: &ToyConfig) -> Result<ToyReport> {
    let (dataset, net) = build_toy(cfg)?;
    let exact: Vec<ConvEngine<'_>> = vec![ConvEngine::Exact; net.conv_weights.len()];
    let float_accuracy = accuracy(&net, &dataset.test, &[])?;
    let bypass_accuracy = accuracy(&net, &dataset.test, &exact)?;
    let inputs = conv_inputs(&net, &dataset.train)?;
    let mut entries = Vec::with_capacity(cfg.levels.len());
    for &levels in &cfg.levels {
        let models = train_conv_models(&net, &inputs, levels, cfg.seed, cfg.max_samples)?;
        let engines: Vec<_> = models
            .iter()
            .map(|model| ConvEngine::Amm { model, backend: Backend::Functional, n_dec: 16, n_s: 32 })
            .collect();
        let acc = accuracy(&net, &dataset.test, &engines)?;
        entries.push(ToyEntry { levels, k: 1 << levels, accuracy: acc, delta: acc - float_accuracy });
    }
    Ok(ToyReport {
        seed: cfg.seed,
        train_images: dataset.train.len(),
        test_images: dataset.test.len(),
        float_accuracy,
        bypass_accuracy,
        entries,
    })
}
