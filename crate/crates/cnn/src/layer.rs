// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};

pub const KERNEL: usize = 3;
/// Length of one flattened 3×3 patch.
pub const PATCH_LEN: usize = KERNEL * KERNEL;

/// A 3×3 convolution over a `c_in × h × w` feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvLayerSpec {
    pub c_in: usize,
    pub c_out: usize,
    pub h: usize,
    pub w: usize,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub padding: usize,
}

fn one() -> usize {
    1
}

impl ConvLayerSpec {
    pub fn new(c_in: usize, c_out: usize, h: usize, w: usize, stride: usize, padding: usize) -> Result<Self> {
        let spec = Self { c_in, c_out, h, w, stride, padding };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_in == 0 || self.c_out == 0 || self.h == 0 || self.w == 0 || self.stride == 0 {
            return dim_err(format!("layer dimensions must be positive: {self:?}"));
        }
        if self.h + 2 * self.padding < KERNEL || self.w + 2 * self.padding < KERNEL {
            return dim_err(format!(
                "{}x{} map with padding {} is smaller than the kernel",
                self.h, self.w, self.padding
            ));
        }
        Ok(())
    }

    pub fn out_h(&self) -> usize {
        (self.h + 2 * self.padding - KERNEL) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.w + 2 * self.padding - KERNEL) / self.stride + 1
    }

    pub fn positions(&self) -> usize {
        self.out_h() * self.out_w()
    }

    /// Width of one im2col row: a patch per input channel.
    pub fn patch_cols(&self) -> usize {
        self.c_in * PATCH_LEN
    }
}

/// Flatten `[c_out][c_in][3][3]` kernels into the `(c_in·9) × c_out` matrix
/// matching [`crate::extract_patches`] columns.
pub fn weight_matrix(kernels: &Array4<f64>) -> Result<Array2<f64>> {
    let (c_out, c_in, kh, kw) = kernels.dim();
    if kh != KERNEL || kw != KERNEL {
        return dim_err(format!("kernels are {kh}x{kw}, only 3x3 is supported"));
    }
    Ok(Array2::from_shape_fn((c_in * PATCH_LEN, c_out), |(r, j)| {
        let (c, p) = (r / PATCH_LEN, r % PATCH_LEN);
        kernels[[j, c, p / KERNEL, p % KERNEL]]
    }))
}
