// SPDX-License-Identifier: Apache-2.0

//! Synthetic labelled images: each class is a smooth random template in
//! `[0, 1]`, and samples add Gaussian pixel noise.

use std::path::Path;

use maddness_core::dataio::{read_f32_matrix, write_f32_matrix};
use ndarray::{Array2, Array3, Array4, ArrayView3, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, CnnError, Result};
use crate::network::InputShape;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub classes: usize,
    pub shape: InputShape,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            classes: 10,
            shape: InputShape { channels: 3, height: 16, width: 16 },
            train_per_class: 40,
            test_per_class: 20,
            noise: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledImages {
    /// `[n][c][h][w]`.
    pub images: Array4<f64>,
    pub labels: Vec<usize>,
}

impl LabelledImages {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> ArrayView3<'_, f64> {
        self.images.index_axis(Axis(0), i)
    }

    /// Store as `<stem>.images.f32` (one flattened image per row) and
    /// `<stem>.labels.f32` (one column).
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let (n, c, h, w) = self.images.dim();
        let flat = self.images.to_shape((n, c * h * w)).map_err(|e| CnnError::Dimension(e.to_string()))?.to_owned();
        write_f32_matrix(&dir.join(format!("{stem}.images.f32")), &flat)?;
        let labels = Array2::from_shape_fn((n, 1), |(i, _)| self.labels[i] as f64);
        write_f32_matrix(&dir.join(format!("{stem}.labels.f32")), &labels)?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str, shape: InputShape) -> Result<Self> {
        let flat = read_f32_matrix(&dir.join(format!("{stem}.images.f32")))?;
        let labels = read_f32_matrix(&dir.join(format!("{stem}.labels.f32")))?;
        let n = flat.nrows();
        if labels.dim() != (n, 1) {
            return dim_err(format!("{} labels for {n} images", labels.nrows()));
        }
        let images = flat
            .into_shape_with_order((n, shape.channels, shape.height, shape.width))
            .map_err(|e| CnnError::Dimension(e.to_string()))?;
        Ok(Self { images, labels: labels.column(0).iter().map(|&v| v as usize).collect() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub config: DatasetConfig,
    pub templates: Vec<Array3<f64>>,
    pub train: LabelledImages,
    pub test: LabelledImages,
}

/// Coarse 4×4 Gaussian grid per channel, bilinearly upsampled and squashed
/// into `[0, 1]`.
fn template(rng: &mut ChaCha8Rng, shape: InputShape) -> Array3<f64> {
    const GRID: usize = 4;
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let coarse = Array3::from_shape_fn((shape.channels, GRID, GRID), |_| normal.sample(rng));
    let sample = |c: usize, y: f64, x: f64| {
        let (y0, x0) = (y.floor() as usize, x.floor() as usize);
        let (y1, x1) = ((y0 + 1).min(GRID - 1), (x0 + 1).min(GRID - 1));
        let (fy, fx) = (y - y0 as f64, x - x0 as f64);
        let top = coarse[[c, y0, x0]] * (1.0 - fx) + coarse[[c, y0, x1]] * fx;
        let bottom = coarse[[c, y1, x0]] * (1.0 - fx) + coarse[[c, y1, x1]] * fx;
        top * (1.0 - fy) + bottom * fy
    };
    let sy = (GRID - 1) as f64 / (shape.height.max(2) - 1) as f64;
    let sx = (GRID - 1) as f64 / (shape.width.max(2) - 1) as f64;
    Array3::from_shape_fn((shape.channels, shape.height, shape.width), |(c, y, x)| {
        let v = sample(c, y as f64 * sy, x as f64 * sx);
        1.0 / (1.0 + (-1.5 * v).exp())
    })
}

fn draw(rng: &mut ChaCha8Rng, templates: &[Array3<f64>], per_class: usize, noise: f64) -> LabelledImages {
    let (c, h, w) = templates[0].dim();
    let n = templates.len() * per_class;
    let normal = Normal::new(0.0, noise).expect("valid noise level");
    let mut images = Array4::zeros((n, c, h, w));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % templates.len();
        labels.push(class);
        let gain = rng.random_range(0.8..1.2);
        for (dst, &t) in images.index_axis_mut(Axis(0), i).iter_mut().zip(templates[class].iter()) {
            *dst = (gain * t + normal.sample(rng)).clamp(0.0, 1.0);
        }
    }
    LabelledImages { images, labels }
}

impl SyntheticDataset {
    pub fn generate(config: DatasetConfig) -> Result<Self> {
        if config.classes == 0 || config.train_per_class == 0 || config.noise.is_nan() || config.noise < 0.0 {
            return dim_err(format!("unusable dataset configuration {config:?}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let templates: Vec<_> = (0..config.classes).map(|_| template(&mut rng, config.shape)).collect();
        let train = draw(&mut rng, &templates, config.train_per_class, config.noise);
        let test = draw(&mut rng, &templates, config.test_per_class, config.noise);
        Ok(Self { config, templates, train, test })
    }
}
