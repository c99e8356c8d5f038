// SPDX-License-Identifier: Apache-2.0

//! Activation quantization to the unsigned 8-bit comparator domain.
//!
//! All rounding in this crate is round-half-away-from-zero followed by a
//! clamp to the target integer range.

use ndarray::{Array2, ArrayView2};

use crate::error::{AmmError, Result};

/// Round half away from zero, then clamp into `[lo, hi]`.
pub fn round_clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.round().clamp(lo, hi)
}

pub(crate) fn check_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(AmmError::InvalidScale { value: scale })
    }
}

/// `clamp(round(x / act_scale), 0, 255)` element-wise.
pub fn quantize_activation(x: &[f64], act_scale: f64) -> Result<Vec<u8>> {
    check_scale(act_scale)?;
    x.iter()
        .enumerate()
        .map(|(index, &v)| {
            if !v.is_finite() {
                return Err(AmmError::NonFinite { index });
            }
            Ok(round_clamp(v / act_scale, 0.0, 255.0) as u8)
        })
        .collect()
}

/// Row-wise [`quantize_activation`] over a matrix.
pub fn quantize_matrix(x: ArrayView2<'_, f64>, act_scale: f64) -> Result<Array2<u8>> {
    check_scale(act_scale)?;
    let cols = x.ncols();
    let mut out = Array2::<u8>::zeros(x.raw_dim());
    for (r, (row, mut dst)) in x.rows().into_iter().zip(out.rows_mut()).enumerate() {
        let q = quantize_activation(row.as_slice().unwrap_or(&row.to_vec()), act_scale).map_err(|e| match e {
            AmmError::NonFinite { index } => AmmError::NonFinite { index: r * cols + index },
            other => other,
        })?;
        dst.iter_mut().zip(q).for_each(|(d, v)| *d = v);
    }
    Ok(out)
}

/// Smallest scale that maps the largest observed activation onto 255.
/// Falls back to 1.0 for an all-nonpositive sample.
pub fn activation_scale_for(x: ArrayView2<'_, f64>) -> f64 {
    let max = x.iter().copied().filter(|v| v.is_finite()).fold(0.0_f64, f64::max);
    if max > 0.0 {
        max / 255.0
    } else {
        1.0
    }
}
