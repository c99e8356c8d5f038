// SPDX-License-Identifier: Apache-2.0

//! 3×3 convolutions on the AMM engine.
//!
//! A layer is lowered to patch rows ([`patches`]), each input channel's nine
//! taps forming one subvector. [`mapping`] assigns channels to pipeline
//! stages and kernels to decoders, tiling layers larger than one array, and
//! [`run`] executes the plan on the functional engine or the simulator.

pub mod dataset;
pub mod error;
pub mod layer;
pub mod mapping;
pub mod network;
pub mod patches;
pub mod run;
pub mod toy;

pub use dataset::{DatasetConfig, LabelledImages, SyntheticDataset};
pub use error::{CnnError, Result};
pub use layer::{weight_matrix, ConvLayerSpec, KERNEL, PATCH_LEN};
pub use mapping::{map_layer, MappingPlan, Tile};
pub use network::{ConvEngine, LayerDesc, Network, NetworkSpec};
pub use patches::extract_patches;
pub use run::{conv_exact, run_layer, Backend, LayerOutput, SimTotals};
pub use toy::{toy_network_eval, ToyConfig, ToyEntry, ToyReport};
