// SPDX-License-Identifier: Apache-2.0

//! Splitting input vectors into equal-length subvectors, one per subspace.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};

/// Layout of a `d`-dimensional input into `m` contiguous subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme")]
pub struct PartitionScheme {
    d: usize,
    m: usize,
    sub_dim: usize,
}

#[derive(Deserialize)]
struct RawScheme {
    d: usize,
    m: usize,
    sub_dim: usize,
}

impl TryFrom<RawScheme> for PartitionScheme {
    type Error = crate::AmmError;

    fn try_from(raw: RawScheme) -> Result<Self> {
        let scheme = PartitionScheme::new(raw.d, raw.m)?;
        if scheme.sub_dim != raw.sub_dim {
            return dim_err(format!("sub_dim {} inconsistent with d={} m={}", raw.sub_dim, raw.d, raw.m));
        }
        Ok(scheme)
    }
}

impl PartitionScheme {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if m == 0 || d == 0 {
            return dim_err(format!("d={d} and m={m} must both be at least 1"));
        }
        if !d.is_multiple_of(m) {
            return dim_err(format!("d={d} is not divisible by m={m}"));
        }
        Ok(Self { d, m, sub_dim: d / m })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    /// Index range of subspace `i` within a full-length vector.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        i * self.sub_dim..(i + 1) * self.sub_dim
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.d {
            return dim_err(format!("vector has length {len}, scheme expects {}", self.d));
        }
        Ok(())
    }
}

/// Split `x` into `scheme.m()` borrowed subvectors of length `scheme.sub_dim()`.
pub fn partition_input<'a, T>(x: &'a [T], scheme: &PartitionScheme) -> Result<Vec<&'a [T]>> {
    scheme.check_len(x.len())?;
    Ok(x.chunks_exact(scheme.sub_dim).collect())
}
