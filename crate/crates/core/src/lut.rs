// SPDX-License-Identifier: Apache-2.0

//! Signed 8-bit lookup tables of prototype/weight dot products and the
//! 16-bit lookup-accumulate decode.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::bdt::EncodedCodes;
use crate::codebook::CodebookSet;
use crate::error::{dim_err, AmmError, Result};
use crate::quant::{check_scale, round_clamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLut")]
pub struct QuantizedLut {
    m: usize,
    k: usize,
    n_out: usize,
    /// Flattened `[m][k][n_out]`.
    entries: Vec<i8>,
    scales: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLut {
    m: usize,
    k: usize,
    n_out: usize,
    entries: Vec<i8>,
    scales: Vec<f64>,
}

impl TryFrom<RawLut> for QuantizedLut {
    type Error = AmmError;

    fn try_from(raw: RawLut) -> Result<Self> {
        QuantizedLut::from_parts(raw.m, raw.k, raw.n_out, raw.entries, raw.scales)
    }
}

impl QuantizedLut {
    pub fn from_parts(m: usize, k: usize, n_out: usize, entries: Vec<i8>, scales: Vec<f64>) -> Result<Self> {
        if entries.len() != m * k * n_out {
            return dim_err(format!("{} LUT entries for shape {m}x{k}x{n_out}", entries.len()));
        }
        if scales.len() != n_out {
            return dim_err(format!("{} scales for {n_out} output columns", scales.len()));
        }
        for &s in &scales {
            check_scale(s)?;
        }
        Ok(Self { m, k, n_out, entries, scales })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// The `n_out` entries stored for prototype `k` of subspace `m`.
    pub fn row(&self, m: usize, k: usize) -> &[i8] {
        let start = (m * self.k + k) * self.n_out;
        &self.entries[start..start + self.n_out]
    }

    pub fn entry(&self, m: usize, k: usize, j: usize) -> i8 {
        self.entries[(m * self.k + k) * self.n_out + j]
    }

    /// Restrict to subspaces `ms` and output columns `js`.
    pub fn slice(&self, ms: std::ops::Range<usize>, js: std::ops::Range<usize>) -> Result<Self> {
        if ms.end > self.m || js.end > self.n_out || ms.is_empty() || js.is_empty() {
            return dim_err(format!(
                "slice {ms:?} x {js:?} outside LUT of {} subspaces, {} columns",
                self.m, self.n_out
            ));
        }
        let mut entries = Vec::with_capacity(ms.len() * self.k * js.len());
        for m in ms.clone() {
            for k in 0..self.k {
                entries.extend_from_slice(&self.row(m, k)[js.clone()]);
            }
        }
        Self::from_parts(ms.len(), self.k, js.len(), entries, self.scales[js].to_vec())
    }
}

fn check_weights(codebooks: &CodebookSet, w: &ArrayView2<'_, f64>) -> Result<()> {
    if w.nrows() != codebooks.scheme().d() {
        return dim_err(format!("weight matrix has {} rows, input dimension is {}", w.nrows(), codebooks.scheme().d()));
    }
    Ok(())
}

/// Exact float dot products `[m][k][j]` of prototypes with weight row-slices.
pub fn prototype_products(codebooks: &CodebookSet, w: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    check_weights(codebooks, &w)?;
    let scheme = codebooks.scheme();
    let n_out = w.ncols();
    let mut out = Vec::with_capacity(scheme.m() * codebooks.k() * n_out);
    for m in 0..scheme.m() {
        let rows = scheme.range(m);
        for k in 0..codebooks.k() {
            let proto = codebooks.prototype(m, k);
            for j in 0..n_out {
                let dot: f64 = proto.iter().zip(rows.clone()).map(|(p, r)| p * w[[r, j]]).sum();
                out.push(dot);
            }
        }
    }
    Ok(out)
}

/// Per-column symmetric scale `max|dot| / 127`, so building the LUT never
/// clamps. Columns with no nonzero product get scale 1.
pub fn select_lut_scales(codebooks: &CodebookSet, w: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let n_out = w.ncols();
    let products = prototype_products(codebooks, w)?;
    let mut max_abs = vec![0.0_f64; n_out];
    for (i, p) in products.iter().enumerate() {
        let j = i % n_out;
        max_abs[j] = max_abs[j].max(p.abs());
    }
    Ok(max_abs.into_iter().map(|m| if m > 0.0 && m.is_finite() { m / 127.0 } else { 1.0 }).collect())
}

/// `entries[m][k][j] = clamp(round(dot(prototype[m][k], W_m[:, j]) / scale[j]), -128, 127)`.
pub fn build_lut(codebooks: &CodebookSet, w: ArrayView2<'_, f64>, lut_scales: &[f64]) -> Result<QuantizedLut> {
    let n_out = w.ncols();
    if lut_scales.len() != n_out {
        return dim_err(format!("{} scales for {n_out} weight columns", lut_scales.len()));
    }
    for &s in lut_scales {
        check_scale(s)?;
    }
    let products = prototype_products(codebooks, w)?;
    let entries =
        products.iter().enumerate().map(|(i, p)| round_clamp(p / lut_scales[i % n_out], -128.0, 127.0) as i8).collect();
    QuantizedLut::from_parts(codebooks.scheme().m(), codebooks.k(), n_out, entries, lut_scales.to_vec())
}

/// Result of a lookup-accumulate: 16-bit two's-complement sums per column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    pub values: Vec<i16>,
    /// Some partial sum left `[-32768, 32767]`; `values` hold the wrapped result.
    pub overflow: bool,
}

/// `out[j] = Σ_m entries[m][codes[m]][j]` with 16-bit wrapping accumulation.
pub fn decode_accumulate(codes: &EncodedCodes, lut: &QuantizedLut) -> Result<Decoded> {
    let codes = codes.as_slice();
    if codes.len() != lut.m {
        return dim_err(format!("{} codes for a LUT with {} subspaces", codes.len(), lut.m));
    }
    let mut exact = vec![0i32; lut.n_out];
    let mut overflow = false;
    for (m, &c) in codes.iter().enumerate() {
        if c as usize >= lut.k {
            return Err(AmmError::InvalidCode { code: c as usize, limit: lut.k });
        }
        for (acc, &e) in exact.iter_mut().zip(lut.row(m, c as usize)) {
            *acc += e as i32;
            overflow |= i16::try_from(*acc).is_err();
        }
    }
    Ok(Decoded { values: exact.into_iter().map(|v| v as i16).collect(), overflow })
}
