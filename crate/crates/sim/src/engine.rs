// SPDX-License-Identifier: Apache-2.0

//! Event-driven execution of the block pipeline.
//!
//! Block `b` serves subspace `b`: it traverses its encoder, reads the
//! `n_dec` decoders in parallel, folds the read values into the carry-save
//! pair received from block `b - 1` and hands the pair on over link `b`.
//! Link `n_s - 1` feeds the output stage, which resolves each column with a
//! ripple-carry add.
//!
//! Inside a block the encoder and the decoders form two overlapped stages
//! joined by a code register: the encoder starts the next input as soon as
//! the decoders have taken the previous code, so a block's initiation
//! interval is the larger of its encoder and decoder latencies. The decoders
//! stay busy until their result is latched into the output register, which
//! is freed when its outgoing handshake returns to idle. A link raises its
//! acknowledge only while the receiving block's input register is empty.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use maddness_core::{Decoded, LearnedModel, QuantizedLut};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::csa::{final_rca, CsaAccumulator};
use crate::decoder::{decoder_energy, decoder_latency, decoder_read, DECODER_ROWS};
use crate::encoder::{encoder_traverse, ENCODER_LEVELS};
use crate::error::{Result, SimError};
use crate::handshake::{HandshakeEvent, HandshakeState, Link};
use crate::ledger::{Category, EnergyLedger, LatencyReport};
use crate::params::SimConfig;

/// Deliberate protocol faults for testing fault detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Injection {
    /// Issue an out-of-order event on `link` during its `transfer`-th cycle.
    IllegalEvent { link: usize, transfer: u64 },
    /// Lose the acknowledge of the `transfer`-th cycle on `link`.
    LostAck { link: usize, transfer: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub trace: bool,
    pub inject: Option<Injection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub timestamp_ps: f64,
    pub block: usize,
    pub unit: &'static str,
    pub event_kind: &'static str,
    pub energy_fj: f64,
}

pub const TRACE_HEADER: &str = "timestamp_ps,block,unit,event_kind,energy_fj";

impl TraceRecord {
    pub fn to_line(&self) -> String {
        format!("{:.3},{},{},{},{:.6}", self.timestamp_ps, self.block, self.unit, self.event_kind, self.energy_fj)
    }
}

/// Render a trace with its header line.
pub fn trace_text(trace: &[TraceRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let _ = writeln!(out, "{}", r.to_line());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub outputs: Vec<Decoded>,
    /// Completion time of each output, in input order.
    pub output_times_ps: Vec<f64>,
    pub latency: LatencyReport,
    pub energy: EnergyLedger,
    /// Committed transfers per link.
    pub transfers: Vec<u64>,
    /// Decoder reads performed.
    pub lookups: u64,
    /// Outputs whose final ripple-carry add overflowed its operands.
    pub rca_overflows: u64,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    EncodeDone { block: usize },
    ReadDone { block: usize },
    Link { link: usize, event: HandshakeEvent },
}

struct Scheduled {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest event; ties in time keep
    // scheduling order.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

type Partial = Vec<CsaAccumulator>;

#[derive(Default)]
struct Block {
    next_input: usize,
    /// Input being traversed by the encoder.
    encoding: Option<usize>,
    code_reg: Option<(usize, u8)>,
    /// Input held by the decoders, from read start until latched.
    decoding: Option<usize>,
    values: Vec<i8>,
    read_done: bool,
    inbox: Option<(usize, Partial)>,
    outbox: Option<(usize, Partial)>,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    inputs: ArrayView2<'a, u8>,
    model: &'a LearnedModel,
    /// `[block][decoder]` array contents, written before the run.
    arrays: Vec<[i8; DECODER_ROWS]>,
    opts: &'a SimOptions,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    now: f64,
    blocks: Vec<Block>,
    links: Vec<Link>,
    ack_waiting: Vec<bool>,
    /// Code produced by the encoder traversal in flight, per block.
    pending_codes: Vec<u8>,
    outputs: Vec<Option<Decoded>>,
    output_times: Vec<f64>,
    completed: usize,
    energy: EnergyLedger,
    latency: LatencyReport,
    lookups: u64,
    rca_overflows: u64,
    trace: Vec<TraceRecord>,
}

/// Check that `model` fits the macro described by `cfg`.
pub fn check_model(model: &LearnedModel, cfg: &SimConfig) -> Result<()> {
    cfg.validate()?;
    let lut = model.lut.as_ref().ok_or_else(|| SimError::ModelMismatch("model has no LUT".into()))?;
    if model.scheme.m() != cfg.n_s {
        return Err(SimError::ModelMismatch(format!("{} subspaces for {} pipeline stages", model.scheme.m(), cfg.n_s)));
    }
    if lut.n_out() != cfg.n_dec {
        return Err(SimError::ModelMismatch(format!("{} output columns for {} decoders", lut.n_out(), cfg.n_dec)));
    }
    if model.trees.iter().any(|t| t.levels() != ENCODER_LEVELS) || lut.k() != DECODER_ROWS {
        return Err(SimError::ModelMismatch(format!(
            "the encoder needs {ENCODER_LEVELS}-level trees and {DECODER_ROWS} prototypes"
        )));
    }
    Ok(())
}

fn load_arrays(lut: &QuantizedLut, n_s: usize, n_dec: usize) -> Vec<[i8; DECODER_ROWS]> {
    let mut arrays = vec![[0i8; DECODER_ROWS]; n_s * n_dec];
    for b in 0..n_s {
        for j in 0..n_dec {
            for (k, cell) in arrays[b * n_dec + j].iter_mut().enumerate() {
                *cell = lut.entry(b, k, j);
            }
        }
    }
    arrays
}

/// Run `inputs` (quantized, one row per input vector) through the macro.
pub fn simulate(
    inputs: ArrayView2<'_, u8>,
    model: &LearnedModel,
    cfg: &SimConfig,
    opts: &SimOptions,
) -> Result<SimOutcome> {
    check_model(model, cfg)?;
    if inputs.ncols() != model.scheme.d() {
        return Err(SimError::ModelMismatch(format!(
            "inputs have {} columns, model expects {}",
            inputs.ncols(),
            model.scheme.d()
        )));
    }
    let lut = model.lut.as_ref().expect("checked above");
    let n = inputs.nrows();
    let mut engine = Engine {
        cfg,
        inputs,
        model,
        arrays: load_arrays(lut, cfg.n_s, cfg.n_dec),
        opts,
        queue: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        blocks: (0..cfg.n_s).map(|_| Block::default()).collect(),
        links: vec![Link::default(); cfg.n_s],
        ack_waiting: vec![false; cfg.n_s],
        pending_codes: vec![0; cfg.n_s],
        outputs: vec![None; n],
        output_times: vec![0.0; n],
        completed: 0,
        energy: EnergyLedger::default(),
        latency: LatencyReport { inputs: n, ..Default::default() },
        lookups: 0,
        rca_overflows: 0,
        trace: Vec::new(),
    };
    engine.run()?;
    Ok(engine.finish())
}

impl Engine<'_> {
    fn schedule(&mut self, delay: f64, event: Event) {
        self.seq += 1;
        self.queue.push(Scheduled { time: self.now + delay, seq: self.seq, event });
    }

    fn record(&mut self, block: usize, unit: &'static str, event_kind: &'static str, energy_fj: f64) {
        if self.opts.trace {
            self.trace.push(TraceRecord { timestamp_ps: self.now, block, unit, event_kind, energy_fj });
        }
    }

    fn run(&mut self) -> Result<()> {
        let n = self.inputs.nrows();
        if n == 0 {
            return Ok(());
        }
        for b in 0..self.cfg.n_s {
            self.try_encode(b)?;
        }
        while let Some(s) = self.queue.pop() {
            self.now = s.time;
            match s.event {
                Event::EncodeDone { block } => self.encode_done(block)?,
                Event::ReadDone { block } => {
                    self.blocks[block].read_done = true;
                    self.try_accumulate(block)?;
                }
                Event::Link { link, event } => self.link_event(link, event)?,
            }
        }
        if self.completed < n {
            let stuck: Vec<String> = self
                .links
                .iter()
                .enumerate()
                .filter(|(_, l)| l.state != HandshakeState::Idle)
                .map(|(i, l)| format!("link {i} in {:?}", l.state))
                .collect();
            return Err(SimError::Deadlock {
                time_ps: self.now,
                completed: self.completed,
                expected: n,
                detail: if stuck.is_empty() { "no pending events".into() } else { stuck.join(", ") },
            });
        }
        Ok(())
    }

    fn try_encode(&mut self, b: usize) -> Result<()> {
        let blk = &self.blocks[b];
        let i = blk.next_input;
        if blk.encoding.is_some() || blk.code_reg.is_some() || i >= self.inputs.nrows() {
            return Ok(());
        }
        let range = self.model.scheme.range(b);
        let row = self.inputs.row(i);
        let sub: Vec<u8> = row.iter().skip(range.start).take(range.len()).copied().collect();
        let r = encoder_traverse(&sub, &self.model.trees[b], self.cfg)?;
        let blk = &mut self.blocks[b];
        blk.next_input += 1;
        blk.encoding = Some(i);
        blk.code_reg = None;
        self.pending_codes[b] = r.code;
        self.energy.log(Category::Encoder, r.energy_fj);
        self.latency.log(Category::Encoder, r.latency_ps);
        self.record(b, "encoder", "traverse", r.energy_fj);
        self.schedule(r.latency_ps, Event::EncodeDone { block: b });
        Ok(())
    }

    fn encode_done(&mut self, b: usize) -> Result<()> {
        let blk = &mut self.blocks[b];
        let i = blk.encoding.take().expect("encoder was busy");
        blk.code_reg = Some((i, self.pending_codes[b]));
        self.try_decode(b)
    }

    fn try_decode(&mut self, b: usize) -> Result<()> {
        let blk = &mut self.blocks[b];
        if blk.decoding.is_some() {
            return Ok(());
        }
        let Some((i, code)) = blk.code_reg.take() else { return Ok(()) };
        blk.decoding = Some(i);
        blk.read_done = false;
        let n_dec = self.cfg.n_dec;
        let mut values = Vec::with_capacity(n_dec);
        for j in 0..n_dec {
            let read = decoder_read(code, &self.arrays[b * n_dec + j], self.cfg).map_err(|e| match e {
                SimError::Fault { message, .. } => SimError::Fault { time_ps: self.now, message },
                other => other,
            })?;
            values.push(read.value);
            self.energy.log(Category::Decoder, read.energy_fj);
        }
        self.lookups += n_dec as u64;
        self.blocks[b].values = values;
        let d = decoder_latency(self.cfg);
        self.latency.log(Category::Decoder, d);
        self.record(b, "decoder", "read", n_dec as f64 * decoder_energy(self.cfg));
        self.schedule(d, Event::ReadDone { block: b });
        self.try_encode(b)
    }

    /// Fold the read values into the upstream pair once both are present.
    fn try_accumulate(&mut self, b: usize) -> Result<()> {
        let blk = &self.blocks[b];
        let Some(i) = blk.decoding else { return Ok(()) };
        if !blk.read_done || blk.outbox.is_some() {
            return Ok(());
        }
        let mut partial = if b == 0 {
            vec![CsaAccumulator::default(); self.cfg.n_dec]
        } else {
            match &blk.inbox {
                Some((src, _)) if *src == i => self.blocks[b].inbox.take().expect("present").1,
                Some((src, _)) => {
                    return Err(SimError::Fault {
                        time_ps: self.now,
                        message: format!("block {b} holds input {src} while computing input {i}"),
                    })
                }
                None => return Ok(()),
            }
        };
        for (acc, &v) in partial.iter_mut().zip(&self.blocks[b].values) {
            acc.add(v);
        }
        let blk = &mut self.blocks[b];
        blk.outbox = Some((i, partial));
        blk.decoding = None;
        blk.read_done = false;
        self.record(b, "csa", "latch", 0.0);
        if b > 0 && self.ack_waiting[b - 1] {
            self.ack_waiting[b - 1] = false;
            self.schedule_ack(b - 1);
        }
        self.schedule(self.cfg.timing.t_hs_phase, Event::Link { link: b, event: HandshakeEvent::RaiseReq });
        self.try_decode(b)
    }

    fn schedule_ack(&mut self, link: usize) {
        if let Some(Injection::LostAck { link: l, transfer }) = self.opts.inject {
            if l == link && self.links[link].transfers == transfer {
                return;
            }
        }
        self.schedule(self.cfg.timing.t_hs_phase, Event::Link { link, event: HandshakeEvent::RaiseAck });
    }

    fn advance(&mut self, link: usize, event: HandshakeEvent) -> Result<bool> {
        let t = self.links[link].advance(event).map_err(|source| SimError::Handshake {
            link,
            time_ps: self.now,
            source,
        })?;
        Ok(t.commit)
    }

    fn link_event(&mut self, link: usize, event: HandshakeEvent) -> Result<()> {
        let h = self.cfg.timing.t_hs_phase;
        let last = link + 1 == self.cfg.n_s;
        match event {
            HandshakeEvent::RaiseReq => {
                self.advance(link, event)?;
                self.record(link, "link", "req_up", 0.0);
                if let Some(Injection::IllegalEvent { link: l, transfer }) = self.opts.inject {
                    if l == link && self.links[link].transfers == transfer {
                        self.advance(link, HandshakeEvent::DropAck)?;
                    }
                }
                if last || self.blocks[link + 1].inbox.is_none() {
                    self.schedule_ack(link);
                } else {
                    self.ack_waiting[link] = true;
                }
            }
            HandshakeEvent::RaiseAck => {
                if !self.advance(link, event)? {
                    return Err(SimError::Fault {
                        time_ps: self.now,
                        message: format!("acknowledge on link {link} did not commit"),
                    });
                }
                self.record(link, "link", "ack_up", 0.0);
                let datum = self.blocks[link].outbox.clone().ok_or_else(|| SimError::Fault {
                    time_ps: self.now,
                    message: format!("link {link} committed with an empty output register"),
                })?;
                if last {
                    self.resolve_output(datum);
                } else {
                    let rx = &mut self.blocks[link + 1];
                    if rx.inbox.is_some() {
                        return Err(SimError::Fault {
                            time_ps: self.now,
                            message: format!("block {} input register overwritten", link + 1),
                        });
                    }
                    rx.inbox = Some(datum);
                    self.try_accumulate(link + 1)?;
                }
                self.schedule(h, Event::Link { link, event: HandshakeEvent::DropReq });
            }
            HandshakeEvent::DropReq => {
                self.advance(link, event)?;
                self.record(link, "link", "req_down", 0.0);
                self.schedule(h, Event::Link { link, event: HandshakeEvent::DropAck });
            }
            HandshakeEvent::DropAck => {
                self.advance(link, event)?;
                let e = self.cfg.energy.e_hs;
                self.energy.log(Category::PipelineControl, e);
                self.latency.log(Category::PipelineControl, 4.0 * h);
                self.record(link, "link", "ack_down", e);
                let (i, _) = self.blocks[link].outbox.take().expect("committed datum");
                if last {
                    self.output_times[i] = self.now;
                    self.completed += 1;
                }
                self.try_accumulate(link)?;
            }
        }
        Ok(())
    }

    fn resolve_output(&mut self, (i, partial): (usize, Partial)) {
        let mut values = Vec::with_capacity(partial.len());
        let mut overflow = false;
        let mut rca_overflow = false;
        for acc in &partial {
            let r = final_rca(acc.pair);
            values.push(r.value);
            overflow |= acc.overflow;
            rca_overflow |= r.overflow;
            self.energy.log(Category::Other, self.cfg.energy.e_rca);
        }
        self.latency.log(Category::Other, 0.0);
        self.rca_overflows += rca_overflow as u64;
        self.record(self.cfg.n_s, "rca", "resolve", partial.len() as f64 * self.cfg.energy.e_rca);
        self.outputs[i] = Some(Decoded { values, overflow });
    }

    fn finish(self) -> SimOutcome {
        let mut latency = self.latency;
        let times = &self.output_times;
        if let (Some(&first), Some(&last)) = (times.first(), times.last()) {
            latency.first_output_ps = first;
            latency.makespan_ps = times.iter().copied().fold(0.0, f64::max);
            if times.len() > 1 {
                latency.initiation_interval_ps = (last - first) / (times.len() - 1) as f64;
            }
        }
        SimOutcome {
            outputs: self.outputs.into_iter().map(|o| o.expect("every output resolved")).collect(),
            output_times_ps: self.output_times,
            latency,
            energy: self.energy,
            transfers: self.links.iter().map(|l| l.transfers).collect(),
            lookups: self.lookups,
            rca_overflows: self.rca_overflows,
            trace: self.trace,
        }
    }
}
