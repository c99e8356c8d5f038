// SPDX-License-Identifier: Apache-2.0

//! Macro shape and the timing, energy and area parameter tables.
//!
//! Voltage presets are embedded TOML tables (see `presets/`). A config file
//! uses the same sections plus `[macro]`; every field is optional and
//! overrides the preset it is layered on.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

const PRESET_0V5: &str = include_str!("../presets/0.5V.toml");
const PRESET_0V8: &str = include_str!("../presets/0.8V.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum VoltagePreset {
    #[default]
    #[serde(rename = "0.5V")]
    V0p5,
    #[serde(rename = "0.8V")]
    V0p8,
}

impl VoltagePreset {
    pub const ALL: [VoltagePreset; 2] = [VoltagePreset::V0p5, VoltagePreset::V0p8];

    pub fn label(self) -> &'static str {
        match self {
            VoltagePreset::V0p5 => "0.5V",
            VoltagePreset::V0p8 => "0.8V",
        }
    }

    fn table(self) -> &'static str {
        match self {
            VoltagePreset::V0p5 => PRESET_0V5,
            VoltagePreset::V0p8 => PRESET_0V8,
        }
    }

    pub fn tables(self) -> PresetTables {
        toml::from_str(self.table()).expect("embedded preset table is valid")
    }
}

impl fmt::Display for VoltagePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for VoltagePreset {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0.5V" | "0.5v" | "0.5" => Ok(VoltagePreset::V0p5),
            "0.8V" | "0.8v" | "0.8" => Ok(VoltagePreset::V0p8),
            other => Err(SimError::Config(format!("unknown voltage preset {other:?}"))),
        }
    }
}

/// Durations in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParams {
    /// Per 1-bit comparator stage inside a DLC.
    pub t_dlc_stage: f64,
    /// Per tree level: selecting and activating the next DLC.
    pub t_mux: f64,
    /// RWL assertion until RBL/RBLB resolved.
    pub t_sram_read: f64,
    pub t_fa: f64,
    /// Per NAND/NOR level of the read-completion tree.
    pub t_rcd_gate: f64,
    /// Per four-phase handshake transition.
    pub t_hs_phase: f64,
}

/// Energies in femtojoules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub e_dlc_eval: f64,
    pub e_sram_read_col: f64,
    pub e_fa: f64,
    pub e_latch: f64,
    /// Per complete handshake cycle.
    pub e_hs: f64,
    /// Per final ripple-carry addition (one per output column).
    pub e_rca: f64,
}

/// Areas in square micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaParams {
    /// One decoder: 16x8 SRAM array, CSA, latch, column RCD.
    pub a_dec: f64,
    /// Per output column outside the blocks: RCA and output register.
    pub a_out: f64,
    pub a_enc: f64,
    /// Per block: pipeline controller, RWL driver, RCD tree, buffers.
    pub a_ctrl: f64,
    pub a_global: f64,
}

/// Per-op energies quoted for the operating point, used only for the
/// analytic efficiency anchor in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEnergies {
    pub decoder_fj_per_op: f64,
    pub encoder_fj_per_op: f64,
}

impl ReferenceEnergies {
    /// `1 / (decoder + encoder)` fJ per op, expressed in TOPS/W.
    pub fn anchor_tops_per_watt(&self) -> f64 {
        1000.0 / (self.decoder_fj_per_op + self.encoder_fj_per_op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetTables {
    pub timing: TimingParams,
    pub energy: EnergyParams,
    pub area: AreaParams,
    pub reference: ReferenceEnergies,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_dec: usize,
    pub n_s: usize,
    pub voltage_preset: VoltagePreset,
    pub timing: TimingParams,
    pub energy: EnergyParams,
    pub area: AreaParams,
    pub reference: ReferenceEnergies,
}

impl SimConfig {
    pub fn preset(preset: VoltagePreset, n_dec: usize, n_s: usize) -> Self {
        let t = preset.tables();
        Self {
            n_dec,
            n_s,
            voltage_preset: preset,
            timing: t.timing,
            energy: t.energy,
            area: t.area,
            reference: t.reference,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dec == 0 || self.n_s == 0 {
            return Err(SimError::Config(format!("n_dec={} and n_s={} must be at least 1", self.n_dec, self.n_s)));
        }
        let t = &self.timing;
        let e = &self.energy;
        let a = &self.area;
        let fields = [
            ("t_dlc_stage", t.t_dlc_stage),
            ("t_mux", t.t_mux),
            ("t_sram_read", t.t_sram_read),
            ("t_fa", t.t_fa),
            ("t_rcd_gate", t.t_rcd_gate),
            ("t_hs_phase", t.t_hs_phase),
            ("e_dlc_eval", e.e_dlc_eval),
            ("e_sram_read_col", e.e_sram_read_col),
            ("e_fa", e.e_fa),
            ("e_latch", e.e_latch),
            ("e_hs", e.e_hs),
            ("e_rca", e.e_rca),
            ("a_dec", a.a_dec),
            ("a_out", a.a_out),
            ("a_enc", a.a_enc),
            ("a_ctrl", a.a_ctrl),
            ("a_global", a.a_global),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::Config(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Depth of the completion tree: 3 NAND/NOR levels over the 8 columns of
    /// one LUT plus `ceil(log2 n_dec)` levels across the block's LUTs.
    pub fn rcd_depth(&self) -> u32 {
        3 + ceil_log2(self.n_dec)
    }

    /// Load a config file over the preset it names (default 0.5V).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text)?;
        file.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            r#macro: MacroSection,
            timing: &'a TimingParams,
            energy: &'a EnergyParams,
            area: &'a AreaParams,
        }
        let doc = Doc {
            r#macro: MacroSection { n_dec: Some(self.n_dec), n_s: Some(self.n_s), preset: Some(self.voltage_preset) },
            timing: &self.timing,
            energy: &self.energy,
            area: &self.area,
        };
        toml::to_string(&doc).expect("config serializes")
    }
}

pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MacroSection {
    n_dec: Option<usize>,
    n_s: Option<usize>,
    preset: Option<VoltagePreset>,
}

macro_rules! overrides {
    ($name:ident for $target:ty { $($field:ident),* $(,)? }) => {
        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct $name {
            $($field: Option<f64>,)*
        }

        impl $name {
            fn apply(&self, target: &mut $target) {
                $(if let Some(v) = self.$field {
                    target.$field = v;
                })*
            }
        }
    };
}

overrides!(TimingOverrides for TimingParams {
    t_dlc_stage, t_mux, t_sram_read, t_fa, t_rcd_gate, t_hs_phase
});
overrides!(EnergyOverrides for EnergyParams { e_dlc_eval, e_sram_read_col, e_fa, e_latch, e_hs, e_rca });
overrides!(AreaOverrides for AreaParams { a_dec, a_out, a_enc, a_ctrl, a_global });

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    r#macro: Option<MacroSection>,
    timing: Option<TimingOverrides>,
    energy: Option<EnergyOverrides>,
    area: Option<AreaOverrides>,
}

impl ConfigFile {
    fn resolve(&self) -> Result<SimConfig> {
        let mac = self.r#macro.as_ref();
        let preset = mac.and_then(|m| m.preset).unwrap_or_default();
        let mut cfg =
            SimConfig::preset(preset, mac.and_then(|m| m.n_dec).unwrap_or(16), mac.and_then(|m| m.n_s).unwrap_or(32));
        if let Some(t) = &self.timing {
            t.apply(&mut cfg.timing);
        }
        if let Some(e) = &self.energy {
            e.apply(&mut cfg.energy);
        }
        if let Some(a) = &self.area {
            a.apply(&mut cfg.area);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
