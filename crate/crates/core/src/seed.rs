// SPDX-License-Identifier: Apache-2.0

use sha2::{Digest, Sha256};

/// Stable sub-seed for a named component: the first eight bytes (little
/// endian) of `SHA-256(seed_le || name)`.
pub fn derive_seed(seed: u64, component: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(component.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
