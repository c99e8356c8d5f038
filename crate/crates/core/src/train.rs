// SPDX-License-Identifier: Apache-2.0

//! Learning trees, prototypes and scales from sample data.
//!
//! Trees are grown greedily level by level. Each node splits on the
//! dimension with the largest variance over the samples that reach it and
//! uses the median of that dimension as its threshold. Because a node only
//! depends on its own bucket, a tree trained with fewer levels is exactly
//! the top of a deeper one, which gives nested codebooks for K sweeps.

use ndarray::{s, Array2, ArrayView2};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bdt::{BdtNode, BdtTree, DEFAULT_LEVELS};
use crate::codebook::CodebookSet;
use crate::error::{dim_err, AmmError, Result};
use crate::gemm::exact_gemm;
use crate::metrics::{error_metrics, ErrorReport};
use crate::model::LearnedModel;
use crate::partition::PartitionScheme;
use crate::quant::{activation_scale_for, check_scale, quantize_matrix};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Bdt,
    Manhattan,
    Euclidean,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 3] = [EncoderKind::Bdt, EncoderKind::Manhattan, EncoderKind::Euclidean];

    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::Bdt => "bdt",
            EncoderKind::Manhattan => "manhattan",
            EncoderKind::Euclidean => "euclidean",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub levels: u32,
    pub m: usize,
    pub seed: u64,
    pub samples: Array2<f64>,
    /// Activation scale; derived from the sample maximum when absent.
    pub act_scale: Option<f64>,
    /// Per-subspace cap on training rows. Larger sets are subsampled with a
    /// stream derived from `(seed, subspace)`.
    pub max_samples: Option<usize>,
}

impl TrainingConfig {
    pub fn new(m: usize, seed: u64, samples: Array2<f64>) -> Self {
        Self { levels: DEFAULT_LEVELS, m, seed, samples, act_scale: None, max_samples: None }
    }

    pub fn with_levels(mut self, levels: u32) -> Self {
        self.levels = levels;
        self
    }

    fn validate(&self) -> Result<PartitionScheme> {
        if self.samples.nrows() == 0 {
            return Err(AmmError::Empty("training samples".into()));
        }
        if let Some(s) = self.act_scale {
            check_scale(s)?;
        }
        if self.levels == 0 || self.levels > 8 {
            return Err(AmmError::InvalidTree(format!("levels={} outside 1..=8", self.levels)));
        }
        PartitionScheme::new(self.samples.ncols(), self.m)
    }
}

fn variance(values: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    let mean = values.clone().sum::<f64>() / n as f64;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
}

/// Smallest threshold that sends the upper half of `sorted` right under the
/// `>=` rule.
fn median_threshold(sorted: &[u8]) -> u8 {
    let h = sorted.len() / 2;
    if h > 0 && sorted[h - 1] < sorted[h] {
        sorted[h - 1] + 1
    } else {
        sorted[h]
    }
}

/// Grow a `levels`-deep tree over quantized `sub_samples`.
///
/// A node whose bucket is empty copies its parent's split dimension with
/// threshold 0; it and any node whose split leaves one side empty are marked
/// degenerate.
pub fn learn_bdt(sub_samples: ArrayView2<'_, u8>, levels: u32) -> Result<BdtTree> {
    let n = sub_samples.nrows();
    let sub_dim = sub_samples.ncols();
    if n == 0 || sub_dim == 0 {
        return Err(AmmError::Empty("no samples to grow a tree from".into()));
    }
    let mut nodes = Vec::with_capacity((1 << levels) - 1);
    let mut buckets: Vec<Vec<usize>> = vec![(0..n).collect()];
    for level in 0..levels {
        let mut next = Vec::with_capacity(buckets.len() * 2);
        for (pos, bucket) in buckets.iter().enumerate() {
            if bucket.is_empty() {
                let parent = (1usize << level) - 1 + pos;
                let parent_dim = if level == 0 {
                    0
                } else {
                    let p: &BdtNode = &nodes[(parent - 1) / 2];
                    p.split_dim
                };
                nodes.push(BdtNode { split_dim: parent_dim, threshold: 0, degenerate: true });
                next.push(Vec::new());
                next.push(Vec::new());
                continue;
            }
            let mut best = (0usize, f64::NEG_INFINITY);
            for dim in 0..sub_dim {
                let col = bucket.iter().map(|&r| sub_samples[[r, dim]] as f64);
                let var = variance(col, bucket.len());
                if var > best.1 {
                    best = (dim, var);
                }
            }
            let dim = best.0;
            let mut values: Vec<u8> = bucket.iter().map(|&r| sub_samples[[r, dim]]).collect();
            values.sort_unstable();
            let threshold = median_threshold(&values);
            let (right, left): (Vec<usize>, Vec<usize>) =
                bucket.iter().partition(|&&r| sub_samples[[r, dim]] >= threshold);
            nodes.push(BdtNode { split_dim: dim, threshold, degenerate: left.is_empty() || right.is_empty() });
            next.push(left);
            next.push(right);
        }
        buckets = next;
    }
    BdtTree::new(levels, sub_dim, nodes)
}

/// Prototypes fitted to a trained tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPrototypes {
    pub prototypes: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
    pub empty: Vec<bool>,
}

/// Prototype `k` is the mean of the real-valued samples whose quantized form
/// reaches leaf `k`. Empty leaves get a zero vector and are flagged.
pub fn fit_prototypes(sub_samples: ArrayView2<'_, f64>, act_scale: f64, tree: &BdtTree) -> Result<FittedPrototypes> {
    if sub_samples.ncols() != tree.sub_dim() {
        return dim_err(format!("samples have {} columns, tree expects {}", sub_samples.ncols(), tree.sub_dim()));
    }
    let q = quantize_matrix(sub_samples, act_scale)?;
    let k = tree.num_leaves();
    let sd = tree.sub_dim();
    let mut sums = vec![vec![0.0; sd]; k];
    let mut counts = vec![0usize; k];
    for (row, qrow) in sub_samples.rows().into_iter().zip(q.rows()) {
        let code = tree.path(&qrow.to_vec()).1 as usize;
        counts[code] += 1;
        sums[code].iter_mut().zip(row.iter()).for_each(|(s, v)| *s += v);
    }
    let prototypes = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { s } else { s.into_iter().map(|v| v / c as f64).collect() })
        .collect();
    let empty = counts.iter().map(|&c| c == 0).collect();
    Ok(FittedPrototypes { prototypes, counts, empty })
}

fn argmin_by(prototypes: &[&[f64]], dist: impl Fn(&[f64]) -> f64) -> usize {
    let mut best = (0usize, f64::INFINITY);
    for (k, p) in prototypes.iter().enumerate() {
        let d = dist(p);
        if d < best.1 {
            best = (k, d);
        }
    }
    best.0
}

/// Index of the prototype at minimum L1 distance; ties go to the smaller index.
pub fn manhattan_encode(subvector: &[f64], prototypes: &[&[f64]]) -> usize {
    argmin_by(prototypes, |p| subvector.iter().zip(p).map(|(a, b)| (a - b).abs()).sum())
}

/// Index of the prototype at minimum squared L2 distance; ties go to the
/// smaller index.
pub fn euclidean_encode(subvector: &[f64], prototypes: &[&[f64]]) -> usize {
    argmin_by(prototypes, |p| subvector.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Train trees and prototypes for every subspace of `cfg.samples`.
pub fn train_model(cfg: &TrainingConfig) -> Result<LearnedModel> {
    let scheme = cfg.validate()?;
    let act_scale = cfg.act_scale.unwrap_or_else(|| activation_scale_for(cfg.samples.view()));
    let n = cfg.samples.nrows();
    let mut trees = Vec::with_capacity(scheme.m());
    let mut nested = Vec::with_capacity(scheme.m());
    let mut empty_leaves = Vec::with_capacity(scheme.m());
    for m in 0..scheme.m() {
        let range = scheme.range(m);
        let full = cfg.samples.slice(s![.., range]);
        let sub = match cfg.max_samples {
            Some(cap) if cap < n => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("subspace-{m}")));
                let mut idx = sample(&mut rng, n, cap.max(1)).into_vec();
                idx.sort_unstable();
                full.select(ndarray::Axis(0), &idx)
            }
            _ => full.to_owned(),
        };
        let q = quantize_matrix(sub.view(), act_scale)?;
        let tree = learn_bdt(q.view(), cfg.levels)?;
        let fitted = fit_prototypes(sub.view(), act_scale, &tree)?;
        trees.push(tree);
        nested.push(fitted.prototypes);
        empty_leaves.push(fitted.empty);
    }
    let codebooks = CodebookSet::from_nested(scheme, &nested)?;
    let mut model = LearnedModel::new(scheme, trees, codebooks, act_scale)?;
    model.seed = cfg.seed;
    model.empty_leaves = empty_leaves;
    Ok(model)
}

/// Approximate `held_out · W` with the chosen encoder and compare against the
/// exact product. The model's LUT is rebuilt from `w`.
pub fn evaluate_encoder(
    kind: EncoderKind,
    held_out: ArrayView2<'_, f64>,
    model: &LearnedModel,
    w: ArrayView2<'_, f64>,
) -> Result<ErrorReport> {
    let mut model = model.clone();
    model.attach_weights(w)?;
    let approx = model.approx_matmul(held_out, kind)?;
    let exact = exact_gemm(held_out, w)?;
    error_metrics(approx.view(), exact.view())
}

/// Train one model per depth in `levels` on the same samples and report the
/// BDT error on `eval`. Greedy level-wise growth makes the shallower trees
/// prefixes of the deeper ones, so the codebooks are nested.
pub fn nested_k_sweep(
    cfg: &TrainingConfig,
    levels: &[u32],
    eval: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
) -> Result<Vec<(usize, ErrorReport)>> {
    levels
        .iter()
        .map(|&l| {
            let model = train_model(&cfg.clone().with_levels(l))?;
            let report = evaluate_encoder(EncoderKind::Bdt, eval, &model, w)?;
            Ok((1usize << l, report))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_samples_give_constant_thresholds() {
        let x = Array2::from_elem((40, 9), 77u8);
        let tree = learn_bdt(x.view(), 4).unwrap();
        assert!(tree.is_fully_degenerate());
        // every node holding samples lies on the all-right spine
        let mut node = 0;
        for _ in 0..4 {
            assert_eq!(tree.nodes()[node].threshold, 77);
            node = 2 * node + 2;
        }
        for (i, n) in tree.nodes().iter().enumerate() {
            assert!(n.threshold == 77 || n.threshold == 0, "node {i}");
        }
    }

    #[test]
    fn bimodal_root_splits_clusters() {
        let mut v: Vec<u8> = (0..8).chain(248..=255).collect();
        v.reverse();
        let x = Array2::from_shape_vec((16, 1), v).unwrap();
        let tree = learn_bdt(x.view(), 4).unwrap();
        let t = tree.nodes()[0].threshold;
        // exhaustive oracle: every threshold that separates the clusters
        let separating: Vec<u8> = (0..=255u8)
            .filter(|&t| x.iter().filter(|&&a| a >= t).all(|&a| a >= 248) && x.iter().filter(|&&a| a >= t).count() == 8)
            .collect();
        assert!(separating.contains(&t));
        assert!(t > 7);
    }

    #[test]
    fn median_split_balance_bounded_by_duplicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let n = rng.random_range(16..300);
            let x = Array2::from_shape_fn((n, 5), |_| rng.random_range(0..32u8));
            let tree = learn_bdt(x.view(), 4).unwrap();
            // replay the buckets
            let mut buckets: Vec<Vec<usize>> = vec![(0..n).collect()];
            for level in 0..4 {
                let mut next = Vec::new();
                for (pos, b) in buckets.iter().enumerate() {
                    let node = tree.nodes()[(1 << level) - 1 + pos];
                    let (r, l): (Vec<usize>, Vec<usize>) =
                        b.iter().partition(|&&i| x[[i, node.split_dim]] >= node.threshold);
                    if !b.is_empty() {
                        let mut vals: Vec<u8> = b.iter().map(|&i| x[[i, node.split_dim]]).collect();
                        vals.sort_unstable();
                        let med = vals[vals.len() / 2];
                        let dups = vals.iter().filter(|&&v| v == med).count();
                        let skew = (l.len() as i64 - (b.len() / 2) as i64).unsigned_abs() as usize;
                        assert!(skew <= dups, "skew {skew} dups {dups}");
                    }
                    next.push(l);
                    next.push(r);
                }
                buckets = next;
            }
        }
    }

    #[test]
    fn distinct_values_give_balanced_leaves() {
        let mut vals: Vec<u8> = (0..=255).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in (1..vals.len()).rev() {
            vals.swap(i, rng.random_range(0..=i));
        }
        let x = Array2::from_shape_vec((256, 1), vals).unwrap();
        let tree = learn_bdt(x.view(), 4).unwrap();
        let mut counts = [0usize; 16];
        for r in x.rows() {
            counts[tree.path(&r.to_vec()).1 as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c == 16), "{counts:?}");
    }

    #[test]
    fn empty_bucket_inherits_parent_dim() {
        // Two samples: the second level has one empty child per side at most.
        let x = Array2::from_shape_vec((2, 2), vec![0u8, 9, 200, 9]).unwrap();
        let tree = learn_bdt(x.view(), 3).unwrap();
        let nodes = tree.nodes();
        assert_eq!(nodes[0].split_dim, 0);
        for (i, n) in nodes.iter().enumerate().skip(1) {
            if n.degenerate && n.threshold == 0 && i >= 3 {
                let parent = &nodes[(i - 1) / 2];
                assert_eq!(n.split_dim, parent.split_dim);
            }
        }
        assert!(nodes.iter().any(|n| n.degenerate));
    }

    #[test]
    fn one_sample_per_leaf_is_its_own_prototype() {
        let vals: Vec<f64> = (0..16).map(|i| (i * 16) as f64).collect();
        let x = Array2::from_shape_vec((16, 1), vals.clone()).unwrap();
        let q = quantize_matrix(x.view(), 1.0).unwrap();
        let tree = learn_bdt(q.view(), 4).unwrap();
        let fit = fit_prototypes(x.view(), 1.0, &tree).unwrap();
        assert!(fit.counts.iter().all(|&c| c == 1));
        for r in 0..16 {
            let code = tree.path(&[q[[r, 0]]]).1 as usize;
            assert_eq!(fit.prototypes[code], vec![vals[r]]);
        }
    }

    #[test]
    fn two_samples_average() {
        let x = Array2::from_shape_vec((2, 2), vec![1.0, 4.0, 3.0, 8.0]).unwrap();
        let tree = BdtTree::uniform(4, 2, 0, 200).unwrap();
        let fit = fit_prototypes(x.view(), 1.0, &tree).unwrap();
        assert_eq!(fit.prototypes[0], vec![2.0, 6.0]);
        assert!(fit.empty[1..].iter().all(|&e| e));
        assert!(fit.prototypes[5].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn prototypes_match_group_by_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Array2::from_shape_fn((500, 6), |_| rng.random_range(0.0..10.0));
        let scale = activation_scale_for(x.view());
        let q = quantize_matrix(x.view(), scale).unwrap();
        let tree = learn_bdt(q.view(), 4).unwrap();
        let fit = fit_prototypes(x.view(), scale, &tree).unwrap();
        let mut groups: std::collections::BTreeMap<u8, Vec<usize>> = Default::default();
        for r in 0..500 {
            groups.entry(tree.path(&q.row(r).to_vec()).1).or_default().push(r);
        }
        for (code, rows) in groups {
            for d in 0..6 {
                let mean = rows.iter().map(|&r| x[[r, d]]).sum::<f64>() / rows.len() as f64;
                assert!((fit.prototypes[code as usize][d] - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nearest_encoders_exact_match_and_ties() {
        let protos: Vec<Vec<f64>> = (0..16).map(|k| vec![k as f64 * 10.0 + 50.0, 1.0]).collect();
        let refs: Vec<&[f64]> = protos.iter().map(Vec::as_slice).collect();
        assert_eq!(manhattan_encode(&[120.0, 1.0], &refs), 7);
        assert_eq!(euclidean_encode(&[120.0, 1.0], &refs), 7);
        let mut tie = protos.clone();
        tie[2] = vec![0.0, 0.0];
        tie[9] = vec![2.0, 2.0];
        let refs: Vec<&[f64]> = tie.iter().map(Vec::as_slice).collect();
        assert_eq!(manhattan_encode(&[1.0, 1.0], &refs), 2);
        assert_eq!(euclidean_encode(&[1.0, 1.0], &refs), 2);
    }

    #[test]
    fn nearest_encoders_match_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let protos: Vec<Vec<f64>> =
                (0..16).map(|_| (0..9).map(|_| rng.random_range(0..8) as f64).collect()).collect();
            let refs: Vec<&[f64]> = protos.iter().map(Vec::as_slice).collect();
            let x: Vec<f64> = (0..9).map(|_| rng.random_range(0..8) as f64).collect();
            let l1: Vec<f64> = protos.iter().map(|p| p.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum()).collect();
            let l2: Vec<f64> = protos.iter().map(|p| p.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum()).collect();
            let first_min = |d: &[f64]| {
                let m = d.iter().cloned().fold(f64::INFINITY, f64::min);
                d.iter().position(|&v| v == m).unwrap()
            };
            assert_eq!(manhattan_encode(&x, &refs), first_min(&l1));
            assert_eq!(euclidean_encode(&x, &refs), first_min(&l2));
        }
    }

    fn clustered(rng: &mut impl Rng, n: usize, d: usize) -> Array2<f64> {
        let centers: Vec<Vec<f64>> = (0..24).map(|_| (0..d).map(|_| rng.random_range(0.0..8.0)).collect()).collect();
        Array2::from_shape_fn((n, d), |(r, c)| {
            let center = &centers[(r * 7919) % centers.len()];
            (center[c] + rng.random_range(-0.6..0.6)).max(0.0)
        })
    }

    #[test]
    fn reproducible_and_nested() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = clustered(&mut rng, 600, 36);
        let a = train_model(&TrainingConfig::new(4, 9, x.clone())).unwrap();
        let b = train_model(&TrainingConfig::new(4, 9, x.clone())).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let coarse = train_model(&TrainingConfig::new(4, 9, x).with_levels(2)).unwrap();
        for (fine, small) in a.trees.iter().zip(&coarse.trees) {
            assert_eq!(&fine.nodes()[..3], small.nodes());
        }
    }

    #[test]
    fn subsampling_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = clustered(&mut rng, 400, 18);
        let mut cfg = TrainingConfig::new(2, 1, x);
        cfg.max_samples = Some(100);
        let a = train_model(&cfg).unwrap();
        assert_eq!(a, train_model(&cfg).unwrap());
    }

    #[test]
    fn prototype_routes_near_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = clustered(&mut rng, 800, 9);
        let model = train_model(&TrainingConfig::new(1, 0, x.clone())).unwrap();
        let tree = &model.trees[0];
        let q = model.quantize(x.view()).unwrap();
        let mut spread = 0.0_f64;
        for (row, qrow) in x.rows().into_iter().zip(q.rows()) {
            let k = tree.path(&qrow.to_vec()).1 as usize;
            let p = model.codebooks.prototype(0, k);
            let d: f64 = row.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            spread = spread.max(d);
        }
        for k in 0..16 {
            if model.empty_leaves[0][k] {
                continue;
            }
            let p = model.codebooks.prototype(0, k).to_vec();
            let pq = crate::quant::quantize_activation(&p, model.act_scale).unwrap();
            let routed = tree.path(&pq).1 as usize;
            let r = model.codebooks.prototype(0, routed);
            let d: f64 = p.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(d <= spread, "leaf {k} -> {routed}: {d} > {spread}");
        }
    }

    #[test]
    fn zero_weights_zero_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = clustered(&mut rng, 200, 18);
        let model = train_model(&TrainingConfig::new(2, 0, x.clone())).unwrap();
        let w = Array2::<f64>::zeros((18, 4));
        for kind in EncoderKind::ALL {
            let r = evaluate_encoder(kind, x.view(), &model, w.view()).unwrap();
            assert_eq!((r.mse, r.rel_frobenius, r.max_abs), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn training_errors() {
        let empty = Array2::<f64>::zeros((0, 9));
        assert!(train_model(&TrainingConfig::new(1, 0, empty)).is_err());
        let x = Array2::<f64>::zeros((5, 10));
        assert!(train_model(&TrainingConfig::new(3, 0, x)).is_err());
    }
}
