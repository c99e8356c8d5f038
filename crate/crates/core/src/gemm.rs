// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array2, ArrayView2};

use crate::bdt::{encode_all, BdtTree};
use crate::error::{dim_err, Result};
use crate::lut::{decode_accumulate, Decoded, QuantizedLut};
use crate::partition::PartitionScheme;

/// Encode every row and run the lookup-accumulate, returning the raw 16-bit
/// sums before dequantization.
pub fn amm_gemm_raw(
    x: ArrayView2<'_, u8>,
    scheme: &PartitionScheme,
    trees: &[BdtTree],
    lut: &QuantizedLut,
) -> Result<Vec<Decoded>> {
    if lut.m() != scheme.m() {
        return dim_err(format!("LUT has {} subspaces, scheme has {}", lut.m(), scheme.m()));
    }
    encode_all(x, scheme, trees)?.iter().map(|codes| decode_accumulate(codes, lut)).collect()
}

/// Approximate `X·W`: `approx[i][j] = decoded[i][j] × scale[j]`.
pub fn amm_gemm(
    x: ArrayView2<'_, u8>,
    scheme: &PartitionScheme,
    trees: &[BdtTree],
    lut: &QuantizedLut,
) -> Result<Array2<f64>> {
    let raw = amm_gemm_raw(x, scheme, trees, lut)?;
    Ok(dequantize(&raw, lut.scales()))
}

pub fn dequantize(raw: &[Decoded], scales: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((raw.len(), scales.len()), |(i, j)| raw[i].values[j] as f64 * scales[j])
}

/// Plain `X·W` with f64 accumulation in `i, k, j` order.
pub fn exact_gemm(x: ArrayView2<'_, f64>, w: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.ncols() != w.nrows() {
        return dim_err(format!("cannot multiply {}x{} by {}x{}", x.nrows(), x.ncols(), w.nrows(), w.ncols()));
    }
    let mut out = Array2::<f64>::zeros((x.nrows(), w.ncols()));
    for i in 0..x.nrows() {
        for k in 0..x.ncols() {
            let a = x[[i, k]];
            if a == 0.0 {
                continue;
            }
            for j in 0..w.ncols() {
                out[[i, j]] += a * w[[k, j]];
            }
        }
    }
    Ok(out)
}
