// SPDX-License-Identifier: Apache-2.0

//! Dual-rail dynamic logic comparator.
//!
//! Eight 1-bit stages in series from the MSB down. A stage whose bits differ
//! discharges YP or YN immediately; otherwise it enables the next lower
//! stage. The resolving stage count is therefore the depth of the first
//! differing bit, and equal operands run through all eight stages.

use serde::{Deserialize, Serialize};

pub const DLC_BITS: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DlcResult {
    /// YP asserted: `a > b`.
    pub greater: bool,
    /// Stages traversed before the output resolved, 1..=8.
    pub stages: u8,
}

pub fn dlc_compare(a: u8, b: u8) -> DlcResult {
    let diff = a ^ b;
    if diff == 0 {
        return DlcResult { greater: false, stages: DLC_BITS };
    }
    let bit = 7 - diff.leading_zeros() as u8;
    DlcResult { greater: (a >> bit) & 1 == 1, stages: DLC_BITS - bit }
}
