// SPDX-License-Identifier: Apache-2.0

//! Small sequential networks: a TOML description and a float/AMM forward
//! pass.

use std::path::{Path, PathBuf};

use maddness_core::LearnedModel;
use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView3};
use serde::{Deserialize, Serialize};

use crate::error::{CnnError, Result};
use crate::layer::{ConvLayerSpec, PATCH_LEN};
use crate::mapping::map_layer;
use crate::run::{conv_exact, run_layer, Backend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerDesc {
    Conv {
        c_out: usize,
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: usize,
        /// Trained model file for this layer, relative to the description.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<PathBuf>,
    },
    Relu,
    MaxPool {
        size: usize,
    },
    Linear {
        out: usize,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub input: InputShape,
    pub layers: Vec<LayerDesc>,
}

/// A layer with its input geometry filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedLayer {
    Conv { spec: ConvLayerSpec, model: Option<PathBuf> },
    Relu,
    MaxPool { size: usize },
    Linear { features: usize, out: usize },
}

pub const TOY_NETWORK: &str = include_str!("../networks/toy.toml");

impl NetworkSpec {
    pub fn toy() -> Self {
        Self::from_toml_str(TOY_NETWORK).expect("embedded network description is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.resolve()?;
        Ok(spec)
    }

    /// Parse a description; relative model paths are resolved against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut spec = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for l in &mut spec.layers {
            if let LayerDesc::Conv { model: Some(m), .. } = l {
                if m.is_relative() {
                    *m = base.join(&*m);
                }
            }
        }
        Ok(spec)
    }

    pub fn resolve(&self) -> Result<Vec<ResolvedLayer>> {
        let mut shape = (self.input.channels, self.input.height, self.input.width);
        let mut flat: Option<usize> = None;
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            if flat.is_some() {
                return Err(CnnError::Network(format!("layer {i} follows the linear head")));
            }
            out.push(match l {
                LayerDesc::Conv { c_out, stride, padding, model } => {
                    let spec = ConvLayerSpec::new(shape.0, *c_out, shape.1, shape.2, *stride, *padding)
                        .map_err(|e| CnnError::Network(format!("layer {i}: {e}")))?;
                    shape = (spec.c_out, spec.out_h(), spec.out_w());
                    ResolvedLayer::Conv { spec, model: model.clone() }
                }
                LayerDesc::Relu => ResolvedLayer::Relu,
                LayerDesc::MaxPool { size } => {
                    if *size == 0 || !shape.1.is_multiple_of(*size) || !shape.2.is_multiple_of(*size) {
                        return Err(CnnError::Network(format!(
                            "layer {i}: pool size {size} does not divide {}x{}",
                            shape.1, shape.2
                        )));
                    }
                    shape = (shape.0, shape.1 / size, shape.2 / size);
                    ResolvedLayer::MaxPool { size: *size }
                }
                LayerDesc::Linear { out } => {
                    let features = shape.0 * shape.1 * shape.2;
                    flat = Some(*out);
                    ResolvedLayer::Linear { features, out: *out }
                }
            });
        }
        if flat.is_none() {
            return Err(CnnError::Network("network must end in a linear layer".into()));
        }
        Ok(out)
    }

    pub fn conv_layers(&self) -> Result<Vec<ConvLayerSpec>> {
        Ok(self
            .resolve()?
            .into_iter()
            .filter_map(|l| match l {
                ResolvedLayer::Conv { spec, .. } => Some(spec),
                _ => None,
            })
            .collect())
    }
}

pub fn relu(x: &mut Array3<f64>) {
    x.mapv_inplace(|v| v.max(0.0));
}

pub fn max_pool(x: ArrayView3<'_, f64>, size: usize) -> Array3<f64> {
    let (c, h, w) = x.dim();
    Array3::from_shape_fn((c, h / size, w / size), |(ch, y, xx)| {
        let mut m = f64::NEG_INFINITY;
        for dy in 0..size {
            for dx in 0..size {
                m = m.max(x[[ch, y * size + dy, xx * size + dx]]);
            }
        }
        m
    })
}

/// How one convolution is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum ConvEngine<'a> {
    Exact,
    Amm { model: &'a LearnedModel, backend: Backend, n_dec: usize, n_s: usize },
}

/// Float weights for every layer of a [`NetworkSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: NetworkSpec,
    /// `(c_in·9) × c_out` per convolution, in order.
    pub conv_weights: Vec<Array2<f64>>,
    /// `(features + 1) × out`; the last row is the bias.
    pub head: Array2<f64>,
}

impl Network {
    pub fn new(spec: NetworkSpec, conv_weights: Vec<Array2<f64>>, head: Array2<f64>) -> Result<Self> {
        let layers = spec.resolve()?;
        let convs = spec.conv_layers()?;
        if convs.len() != conv_weights.len() {
            return Err(CnnError::Network(format!(
                "{} weight sets for {} convolutions",
                conv_weights.len(),
                convs.len()
            )));
        }
        for (l, w) in convs.iter().zip(&conv_weights) {
            if w.dim() != (l.c_in * PATCH_LEN, l.c_out) {
                return Err(CnnError::Network(format!("weights {:?} do not fit {l:?}", w.dim())));
            }
        }
        if let Some(ResolvedLayer::Linear { features, out }) = layers.last() {
            if head.dim() != (features + 1, *out) {
                return Err(CnnError::Network(format!("head is {:?}, expected ({}, {out})", head.dim(), features + 1)));
            }
        }
        Ok(Self { spec, conv_weights, head })
    }

    /// Run every layer before the head; returns the flattened features.
    pub fn features(&self, image: ArrayView3<'_, f64>, engines: &[ConvEngine<'_>]) -> Result<Array1<f64>> {
        let mut x = image.to_owned();
        let mut conv = 0;
        for layer in self.spec.resolve()? {
            match layer {
                ResolvedLayer::Conv { spec, .. } => {
                    x = match engines.get(conv).copied().unwrap_or(ConvEngine::Exact) {
                        ConvEngine::Exact => conv_exact(x.view(), &spec, self.conv_weights[conv].view())?,
                        ConvEngine::Amm { model, backend, n_dec, n_s } => {
                            let plan = map_layer(&spec, n_dec, n_s)?;
                            run_layer(&plan, &spec, model, x.view(), backend)?.values
                        }
                    };
                    conv += 1;
                }
                ResolvedLayer::Relu => relu(&mut x),
                ResolvedLayer::MaxPool { size } => x = max_pool(x.view(), size),
                ResolvedLayer::Linear { .. } => break,
            }
        }
        Ok(Array1::from_iter(x.iter().copied()))
    }

    pub fn logits(&self, features: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = features.len();
        let w = self.head.slice(ndarray::s![..n, ..]);
        features.dot(&w) + self.head.row(n)
    }

    pub fn classify(&self, image: ArrayView3<'_, f64>, engines: &[ConvEngine<'_>]) -> Result<usize> {
        let f = self.features(image, engines)?;
        Ok(argmax(self.logits(f.view()).view()))
    }
}

/// Index of the largest value; ties go to the smaller index.
pub fn argmax(v: ArrayView1<'_, f64>) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best }).0
}
