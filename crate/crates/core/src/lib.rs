// SPDX-License-Identifier: Apache-2.0

//! Functional MADDNESS engine.
//!
//! Inputs are split into subvectors ([`partition`]), each subvector is
//! mapped to one of `2^levels` prototypes by a balanced decision tree
//! ([`bdt`]), and the product with a weight matrix is assembled by summing
//! precomputed 8-bit dot products out of a lookup table ([`lut`]). The
//! [`train`] module learns trees, prototypes and scales from sample data.

pub mod bdt;
pub mod codebook;
pub mod dataio;
pub mod error;
pub mod gemm;
pub mod lut;
pub mod metrics;
pub mod model;
pub mod partition;
pub mod quant;
pub mod seed;
pub mod train;

pub use bdt::{bdt_encode, encode_all, BdtNode, BdtTree, EncodedCodes};
pub use codebook::CodebookSet;
pub use error::{AmmError, Result};
pub use gemm::{amm_gemm, amm_gemm_raw, exact_gemm};
pub use lut::{build_lut, decode_accumulate, select_lut_scales, Decoded, QuantizedLut};
pub use metrics::{error_metrics, ErrorReport};
pub use model::{LearnedModel, MODEL_SCHEMA_VERSION};
pub use partition::{partition_input, PartitionScheme};
pub use quant::{quantize_activation, quantize_matrix};
pub use train::{
    euclidean_encode, evaluate_encoder, fit_prototypes, learn_bdt, manhattan_encode, nested_k_sweep, train_model,
    EncoderKind, TrainingConfig,
};
