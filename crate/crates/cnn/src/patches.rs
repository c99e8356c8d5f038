// SPDX-License-Identifier: Apache-2.0

//! im2col: one row per output position, one 9-element patch per channel.

use ndarray::{Array2, ArrayView3};

use crate::error::{dim_err, Result};
use crate::layer::{ConvLayerSpec, KERNEL, PATCH_LEN};

/// Rows follow output positions in row-major order. Row `r` holds, for each
/// input channel `c`, the 3×3 window flattened top-left to bottom-right in
/// columns `9c..9c+9`. Samples outside the map read as zero.
pub fn extract_patches(map: ArrayView3<'_, f64>, layer: &ConvLayerSpec) -> Result<Array2<f64>> {
    layer.validate()?;
    if map.dim() != (layer.c_in, layer.h, layer.w) {
        return dim_err(format!(
            "feature map is {:?}, layer expects ({}, {}, {})",
            map.dim(),
            layer.c_in,
            layer.h,
            layer.w
        ));
    }
    let (oh, ow) = (layer.out_h(), layer.out_w());
    let pad = layer.padding as isize;
    let mut out = Array2::zeros((oh * ow, layer.patch_cols()));
    for (pos, mut row) in out.outer_iter_mut().enumerate() {
        let y0 = (pos / ow * layer.stride) as isize - pad;
        let x0 = (pos % ow * layer.stride) as isize - pad;
        for c in 0..layer.c_in {
            for p in 0..PATCH_LEN {
                let y = y0 + (p / KERNEL) as isize;
                let x = x0 + (p % KERNEL) as isize;
                if (0..layer.h as isize).contains(&y) && (0..layer.w as isize).contains(&x) {
                    row[c * PATCH_LEN + p] = map[[c, y as usize, x as usize]];
                }
            }
        }
    }
    Ok(out)
}
