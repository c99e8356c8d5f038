// SPDX-License-Identifier: Apache-2.0

//! Learned model and its JSON document format.

use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::bdt::{encode_all, BdtTree, EncodedCodes};
use crate::codebook::CodebookSet;
use crate::error::{dim_err, AmmError, Result};
use crate::gemm::dequantize;
use crate::lut::{build_lut, decode_accumulate, select_lut_scales, Decoded, QuantizedLut};
use crate::partition::PartitionScheme;
use crate::quant::{check_scale, quantize_matrix};
use crate::train::{euclidean_encode, manhattan_encode, EncoderKind};

pub const MODEL_SCHEMA_VERSION: u32 = 1;
const MODEL_KIND: &str = "maddness-model";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedModel {
    pub scheme: PartitionScheme,
    pub trees: Vec<BdtTree>,
    pub codebooks: CodebookSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lut: Option<QuantizedLut>,
    pub act_scale: f64,
    /// Training seed, kept for provenance.
    #[serde(default)]
    pub seed: u64,
    /// `[m][k]` true where training routed no sample to leaf `k`.
    #[serde(default)]
    pub empty_leaves: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    schema_version: u32,
    kind: String,
    model: LearnedModel,
}

impl LearnedModel {
    pub fn new(scheme: PartitionScheme, trees: Vec<BdtTree>, codebooks: CodebookSet, act_scale: f64) -> Result<Self> {
        let model = Self { scheme, trees, codebooks, lut: None, act_scale, seed: 0, empty_leaves: Vec::new() };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_scale(self.act_scale)?;
        if self.trees.len() != self.scheme.m() {
            return dim_err(format!("{} trees for {} subspaces", self.trees.len(), self.scheme.m()));
        }
        if *self.codebooks.scheme() != self.scheme {
            return dim_err("codebook scheme differs from model scheme");
        }
        for t in &self.trees {
            if t.sub_dim() != self.scheme.sub_dim() {
                return dim_err("tree sub_dim differs from scheme");
            }
            if t.num_leaves() != self.codebooks.k() {
                return dim_err(format!(
                    "tree has {} leaves but codebooks hold {} prototypes",
                    t.num_leaves(),
                    self.codebooks.k()
                ));
            }
        }
        if let Some(lut) = &self.lut {
            if lut.m() != self.scheme.m() || lut.k() != self.codebooks.k() {
                return dim_err("LUT shape inconsistent with model");
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> u32 {
        self.trees.first().map_or(0, BdtTree::levels)
    }

    pub fn k(&self) -> usize {
        self.codebooks.k()
    }

    /// Build the LUT for `w` with per-column scales chosen to avoid clamping.
    pub fn attach_weights(&mut self, w: ArrayView2<'_, f64>) -> Result<()> {
        let scales = select_lut_scales(&self.codebooks, w)?;
        self.lut = Some(build_lut(&self.codebooks, w, &scales)?);
        Ok(())
    }

    pub fn require_lut(&self) -> Result<&QuantizedLut> {
        self.lut.as_ref().ok_or_else(|| AmmError::Format("model has no LUT; supply weights first".into()))
    }

    pub fn quantize(&self, x: ArrayView2<'_, f64>) -> Result<Array2<u8>> {
        quantize_matrix(x, self.act_scale)
    }

    /// Prototype indices for every row of real-valued `x`.
    pub fn encode(&self, x: ArrayView2<'_, f64>, kind: EncoderKind) -> Result<Vec<EncodedCodes>> {
        self.scheme.check_len(x.ncols())?;
        match kind {
            EncoderKind::Bdt => encode_all(self.quantize(x)?.view(), &self.scheme, &self.trees),
            EncoderKind::Manhattan | EncoderKind::Euclidean => {
                let columns: Vec<Vec<&[f64]>> = (0..self.scheme.m()).map(|m| self.codebooks.column(m)).collect();
                x.rows()
                    .into_iter()
                    .map(|row| {
                        let row = row.to_vec();
                        let codes = columns
                            .iter()
                            .enumerate()
                            .map(|(m, col)| {
                                let sub = &row[self.scheme.range(m)];
                                let k = if kind == EncoderKind::Manhattan {
                                    manhattan_encode(sub, col)
                                } else {
                                    euclidean_encode(sub, col)
                                };
                                k as u8
                            })
                            .collect();
                        EncodedCodes::new(codes, self.k())
                    })
                    .collect()
            }
        }
    }

    pub fn decode(&self, codes: &[EncodedCodes]) -> Result<Vec<Decoded>> {
        let lut = self.require_lut()?;
        codes.iter().map(|c| decode_accumulate(c, lut)).collect()
    }

    /// Dequantized approximate product of `x` with the weights baked into the LUT.
    pub fn approx_matmul(&self, x: ArrayView2<'_, f64>, kind: EncoderKind) -> Result<Array2<f64>> {
        let raw = self.decode(&self.encode(x, kind)?)?;
        Ok(dequantize(&raw, self.require_lut()?.scales()))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc =
            ModelDocument { schema_version: MODEL_SCHEMA_VERSION, kind: MODEL_KIND.to_string(), model: self.clone() };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| AmmError::Format("missing schema_version".into()))?;
        if version != MODEL_SCHEMA_VERSION as u64 {
            return Err(AmmError::SchemaVersion { found: version as u32, expected: MODEL_SCHEMA_VERSION });
        }
        let doc: ModelDocument = serde_json::from_value(value)?;
        if doc.kind != MODEL_KIND {
            return Err(AmmError::Format(format!("document kind {:?} is not a model", doc.kind)));
        }
        doc.model.validate()?;
        Ok(doc.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::{train_model, TrainingConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_model() -> LearnedModel {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples = Array2::from_shape_fn((200, 18), |_| rng.random_range(0.0..4.0));
        let mut model = train_model(&TrainingConfig::new(2, 7, samples)).unwrap();
        let w = Array2::from_shape_fn((18, 3), |_| rng.random_range(-1.0..1.0));
        model.attach_weights(w.view()).unwrap();
        model
    }

    #[test]
    fn json_roundtrip() {
        let model = small_model();
        let text = model.to_json().unwrap();
        let back = LearnedModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn rejects_wrong_version_and_kind() {
        let text = small_model().to_json().unwrap();
        let bumped = text.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        assert!(matches!(LearnedModel::from_json(&bumped), Err(AmmError::SchemaVersion { found: 2, .. })));
        let no_version = text.replacen("\"schema_version\": 1,", "", 1);
        assert!(LearnedModel::from_json(&no_version).is_err());
        let wrong_kind = text.replacen("maddness-model", "something-else", 1);
        assert!(LearnedModel::from_json(&wrong_kind).is_err());
    }

    #[test]
    fn rejects_out_of_range_lut_entry() {
        let text = small_model().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let mut v = v;
        v["model"]["lut"]["entries"][0] = serde_json::json!(300);
        assert!(LearnedModel::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn missing_lut_reported() {
        let mut model = small_model();
        model.lut = None;
        let x = Array2::<f64>::zeros((1, 18));
        assert!(model.approx_matmul(x.view(), EncoderKind::Bdt).is_err());
    }
}
