// SPDX-License-Identifier: Apache-2.0

//! Carry-save accumulation and the final ripple-carry resolution.

use serde::{Deserialize, Serialize};

/// Redundant 16-bit accumulator word pair; the value is `sum + carry`
/// modulo 2^16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CsaPair {
    pub sum: i16,
    pub carry: i16,
}

impl CsaPair {
    pub fn value(self) -> i16 {
        self.sum.wrapping_add(self.carry)
    }
}

/// One CSA stage: add a sign-extended 8-bit value to the pair.
pub fn csa_add(acc: CsaPair, value: i8) -> CsaPair {
    let s = acc.sum as u16;
    let c = acc.carry as u16;
    let v = value as i16 as u16;
    let sum = s ^ c ^ v;
    let carry = ((s & c) | (s & v) | (c & v)) << 1;
    CsaPair { sum: sum as i16, carry: carry as i16 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcaResult {
    pub value: i16,
    /// Signed overflow of the 16-bit adder on its two operands.
    pub overflow: bool,
}

pub fn final_rca(acc: CsaPair) -> RcaResult {
    let wide = acc.sum as i32 + acc.carry as i32;
    RcaResult { value: acc.value(), overflow: i16::try_from(wide).is_err() }
}

/// A CSA pair plus a wide shadow of the running total, used to raise the
/// 16-bit range diagnostic that the redundant form cannot see by itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CsaAccumulator {
    pub pair: CsaPair,
    exact: i32,
    pub overflow: bool,
}

impl CsaAccumulator {
    pub fn add(&mut self, value: i8) {
        self.pair = csa_add(self.pair, value);
        self.exact += value as i32;
        self.overflow |= i16::try_from(self.exact).is_err();
    }

    pub fn exact(&self) -> i32 {
        self.exact
    }
}
