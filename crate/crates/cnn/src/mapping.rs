// SPDX-License-Identifier: Apache-2.0

//! Assignment of input channels to pipeline stages and output kernels to
//! decoders, with tiling for layers larger than the macro.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::layer::ConvLayerSpec;

/// One pass over the macro.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub channels: Range<usize>,
    pub kernels: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingPlan {
    pub n_dec: usize,
    pub n_s: usize,
    /// Pipeline stage of each input channel within its tile.
    pub stage_assignment: Vec<usize>,
    /// Decoder of each output kernel within its tile.
    pub decoder_assignment: Vec<usize>,
    /// Kernel tiles outermost; channel tiles of one kernel tile are
    /// consecutive so partial sums carry from one pass to the next.
    pub tiles: Vec<Tile>,
}

impl MappingPlan {
    pub fn channel_tiles(&self) -> usize {
        self.tiles.iter().filter(|t| t.kernels.start == 0).count()
    }

    pub fn kernel_tiles(&self) -> usize {
        self.tiles.iter().filter(|t| t.channels.start == 0).count()
    }
}

fn chunks(n: usize, size: usize) -> impl Iterator<Item = Range<usize>> {
    (0..n.div_ceil(size)).map(move |i| i * size..((i + 1) * size).min(n))
}

pub fn map_layer(layer: &ConvLayerSpec, n_dec: usize, n_s: usize) -> Result<MappingPlan> {
    layer.validate()?;
    if n_dec == 0 || n_s == 0 {
        return dim_err(format!("macro ({n_dec}, {n_s}) must have at least one decoder and stage"));
    }
    let tiles = chunks(layer.c_out, n_dec)
        .flat_map(|kernels| chunks(layer.c_in, n_s).map(move |channels| Tile { channels, kernels: kernels.clone() }))
        .collect();
    Ok(MappingPlan {
        n_dec,
        n_s,
        stage_assignment: (0..layer.c_in).map(|c| c % n_s).collect(),
        decoder_assignment: (0..layer.c_out).map(|k| k % n_dec).collect(),
        tiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layer(c_in: usize, c_out: usize) -> ConvLayerSpec {
        ConvLayerSpec::new(c_in, c_out, 4, 4, 1, 1).unwrap()
    }

    #[test]
    fn fits_in_one_pass() {
        let plan = map_layer(&layer(32, 16), 16, 32).unwrap();
        assert_eq!(plan.tiles.len(), 1);
    }

    #[test]
    fn two_channel_passes() {
        let plan = map_layer(&layer(64, 16), 16, 32).unwrap();
        assert_eq!(plan.tiles.len(), 2);
        assert_eq!(plan.channel_tiles(), 2);
        assert_eq!(plan.kernel_tiles(), 1);
        assert_eq!(plan.tiles[1].channels, 32..64);
    }

    proptest! {
        #[test]
        fn tiles_cover_each_pair_once(c_in in 1usize..40, c_out in 1usize..40, n_dec in 1usize..20, n_s in 1usize..20) {
            let plan = map_layer(&layer(c_in, c_out), n_dec, n_s).unwrap();
            prop_assert_eq!(plan.tiles.len(), c_in.div_ceil(n_s) * c_out.div_ceil(n_dec));
            let mut hits = vec![0u32; c_in * c_out];
            for t in &plan.tiles {
                prop_assert!(t.channels.len() <= n_s && t.kernels.len() <= n_dec);
                for c in t.channels.clone() {
                    for k in t.kernels.clone() {
                        hits[c * c_out + k] += 1;
                    }
                }
            }
            prop_assert!(hits.iter().all(|&h| h == 1));
            prop_assert!(plan.stage_assignment.iter().all(|&s| s < n_s));
            prop_assert!(plan.decoder_assignment.iter().all(|&d| d < n_dec));
        }
    }
}
