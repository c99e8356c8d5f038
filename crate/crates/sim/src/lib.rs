// SPDX-License-Identifier: Apache-2.0

//! Event-driven model of a self-synchronous LUT accelerator.
//!
//! A macro has `n_s` pipeline blocks, each with one decision-tree encoder
//! built from dual-rail dynamic comparators ([`dlc`], [`encoder`]) and
//! `n_dec` SRAM lookup decoders ([`decoder`]). Partial sums travel between
//! blocks in carry-save form ([`csa`]) under a four-phase handshake
//! ([`handshake`]). [`engine::simulate`] runs a stream of inputs and returns
//! bit-exact outputs together with energy and latency ledgers ([`ledger`]),
//! which [`metrics`] turns into throughput and efficiency figures.

pub mod area;
pub mod calibrate;
pub mod csa;
pub mod decoder;
pub mod dlc;
pub mod encoder;
pub mod engine;
pub mod error;
pub mod handshake;
pub mod ledger;
pub mod metrics;
pub mod params;
pub mod synth;

pub use area::{area_estimate, AreaEstimate};
pub use csa::{csa_add, final_rca, CsaPair};
pub use decoder::decoder_read;
pub use dlc::{dlc_compare, DlcResult};
pub use encoder::encoder_traverse;
pub use engine::{simulate, trace_text, Injection, SimOptions, SimOutcome, TraceRecord};
pub use error::{Result, SimError};
pub use handshake::{handshake_advance, HandshakeEvent, HandshakeState};
pub use ledger::{Category, EnergyLedger, LatencyReport};
pub use metrics::{report_metrics, Metrics, SimReport, DEFAULT_OPS_PER_LOOKUP, METRICS_SCHEMA_VERSION};
pub use params::{SimConfig, VoltagePreset};
