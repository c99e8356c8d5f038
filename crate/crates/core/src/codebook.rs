// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::partition::PartitionScheme;

/// Per-subspace prototype vectors, `m × k` of them, each `sub_dim` long.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCodebooks")]
pub struct CodebookSet {
    scheme: PartitionScheme,
    k: usize,
    /// Flattened `[m][k][sub_dim]`.
    prototypes: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCodebooks {
    scheme: PartitionScheme,
    k: usize,
    prototypes: Vec<f64>,
}

impl TryFrom<RawCodebooks> for CodebookSet {
    type Error = crate::AmmError;

    fn try_from(raw: RawCodebooks) -> Result<Self> {
        CodebookSet::from_flat(raw.scheme, raw.k, raw.prototypes)
    }
}

impl CodebookSet {
    pub fn from_flat(scheme: PartitionScheme, k: usize, prototypes: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return dim_err("codebooks need at least one prototype");
        }
        let want = scheme.m() * k * scheme.sub_dim();
        if prototypes.len() != want {
            return dim_err(format!("{} prototype values supplied, expected {want}", prototypes.len()));
        }
        Ok(Self { scheme, k, prototypes })
    }

    /// Build from nested `[m][k]` prototype vectors.
    pub fn from_nested(scheme: PartitionScheme, nested: &[Vec<Vec<f64>>]) -> Result<Self> {
        if nested.len() != scheme.m() {
            return dim_err(format!("{} codebooks for {} subspaces", nested.len(), scheme.m()));
        }
        let k = nested.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(scheme.m() * k * scheme.sub_dim());
        for book in nested {
            if book.len() != k {
                return dim_err("codebooks differ in prototype count");
            }
            for proto in book {
                if proto.len() != scheme.sub_dim() {
                    return dim_err(format!(
                        "prototype of length {} in a sub_dim={} scheme",
                        proto.len(),
                        scheme.sub_dim()
                    ));
                }
                flat.extend_from_slice(proto);
            }
        }
        Self::from_flat(scheme, k, flat)
    }

    pub fn zeros(scheme: PartitionScheme, k: usize) -> Result<Self> {
        Self::from_flat(scheme, k, vec![0.0; scheme.m() * k * scheme.sub_dim()])
    }

    pub fn scheme(&self) -> &PartitionScheme {
        &self.scheme
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn prototype(&self, m: usize, k: usize) -> &[f64] {
        let sd = self.scheme.sub_dim();
        let start = (m * self.k + k) * sd;
        &self.prototypes[start..start + sd]
    }

    /// All `k` prototypes of subspace `m`.
    pub fn column(&self, m: usize) -> Vec<&[f64]> {
        (0..self.k).map(|k| self.prototype(m, k)).collect()
    }

    /// Concatenate one prototype per subspace into a full-length vector.
    pub fn reconstruct(&self, codes: &[u8]) -> Vec<f64> {
        codes.iter().enumerate().flat_map(|(m, &c)| self.prototype(m, c as usize).iter().copied()).collect()
    }
}
