// SPDX-License-Identifier: Apache-2.0

//! Balanced binary decision tree encoder.
//!
//! Nodes are stored level by level (heap order): the root is node 0 and the
//! children of node `i` are `2i + 1` (element below threshold) and `2i + 2`
//! (element at or above threshold). The code is the path word with the root
//! decision as its most significant bit, so a leaf's code equals its position
//! in the last level.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, AmmError, Result};
use crate::partition::PartitionScheme;

pub const DEFAULT_LEVELS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BdtNode {
    pub split_dim: usize,
    pub threshold: u8,
    /// Set by training when the node's split leaves one side empty.
    #[serde(default)]
    pub degenerate: bool,
}

impl BdtNode {
    pub fn new(split_dim: usize, threshold: u8) -> Self {
        Self { split_dim, threshold, degenerate: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTree")]
pub struct BdtTree {
    levels: u32,
    sub_dim: usize,
    nodes: Vec<BdtNode>,
}

#[derive(Deserialize)]
struct RawTree {
    levels: u32,
    sub_dim: usize,
    nodes: Vec<BdtNode>,
}

impl TryFrom<RawTree> for BdtTree {
    type Error = AmmError;

    fn try_from(raw: RawTree) -> Result<Self> {
        BdtTree::new(raw.levels, raw.sub_dim, raw.nodes)
    }
}

impl BdtTree {
    /// Validates node count (`2^levels - 1`) and that every split dimension
    /// indexes into a `sub_dim`-long subvector.
    pub fn new(levels: u32, sub_dim: usize, nodes: Vec<BdtNode>) -> Result<Self> {
        if levels == 0 || levels > 8 {
            return Err(AmmError::InvalidTree(format!("levels={levels} outside 1..=8")));
        }
        let expected = (1usize << levels) - 1;
        if nodes.len() != expected {
            return Err(AmmError::InvalidTree(format!(
                "{} nodes supplied, {levels} levels need {expected}",
                nodes.len()
            )));
        }
        if let Some((i, n)) = nodes.iter().enumerate().find(|(_, n)| n.split_dim >= sub_dim) {
            return Err(AmmError::InvalidTree(format!(
                "node {i} splits on dimension {} but sub_dim is {sub_dim}",
                n.split_dim
            )));
        }
        Ok(Self { levels, sub_dim, nodes })
    }

    /// Tree where every node compares the same element against the same value.
    pub fn uniform(levels: u32, sub_dim: usize, split_dim: usize, threshold: u8) -> Result<Self> {
        let n = (1usize << levels.min(8)) - 1;
        Self::new(levels, sub_dim, vec![BdtNode::new(split_dim, threshold); n])
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    pub fn nodes(&self) -> &[BdtNode] {
        &self.nodes
    }

    /// Number of leaves, `2^levels`.
    pub fn num_leaves(&self) -> usize {
        1 << self.levels
    }

    pub fn is_fully_degenerate(&self) -> bool {
        self.nodes.iter().all(|n| n.degenerate)
    }

    /// Node indices visited for `subvector`, root first, plus the leaf code.
    pub fn path(&self, subvector: &[u8]) -> ([usize; 8], u8) {
        let mut visited = [0usize; 8];
        let mut node = 0usize;
        let mut code = 0u8;
        for slot in visited.iter_mut().take(self.levels as usize) {
            *slot = node;
            let n = &self.nodes[node];
            let bit = (subvector[n.split_dim] >= n.threshold) as u8;
            code = (code << 1) | bit;
            node = 2 * node + 1 + bit as usize;
        }
        (visited, code)
    }
}

/// One quantized input row: a prototype index per subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodedCodes(Vec<u8>);

impl EncodedCodes {
    /// Checks every code against the leaf count `k`.
    pub fn new(codes: Vec<u8>, k: usize) -> Result<Self> {
        if let Some(&c) = codes.iter().find(|&&c| c as usize >= k) {
            return Err(AmmError::InvalidCode { code: c as usize, limit: k });
        }
        Ok(Self(codes))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Walk `tree` over `subvector`; bit = 1 iff the element is >= the threshold.
pub fn bdt_encode(subvector: &[u8], tree: &BdtTree) -> Result<u8> {
    if subvector.len() < tree.sub_dim {
        return dim_err(format!("subvector has length {}, tree expects {}", subvector.len(), tree.sub_dim));
    }
    Ok(tree.path(subvector).1)
}

/// Encode every row of `x` (one tree per subspace).
pub fn encode_all(x: ArrayView2<'_, u8>, scheme: &PartitionScheme, trees: &[BdtTree]) -> Result<Vec<EncodedCodes>> {
    scheme.check_len(x.ncols())?;
    if trees.len() != scheme.m() {
        return dim_err(format!("{} trees supplied for {} subspaces", trees.len(), scheme.m()));
    }
    if let Some(t) = trees.iter().find(|t| t.sub_dim != scheme.sub_dim()) {
        return dim_err(format!("tree sub_dim {} differs from scheme sub_dim {}", t.sub_dim, scheme.sub_dim()));
    }
    let k = trees.iter().map(BdtTree::num_leaves).max().unwrap_or(1);
    x.rows()
        .into_iter()
        .map(|row| {
            let row = row.to_vec();
            let codes = trees.iter().enumerate().map(|(m, tree)| tree.path(&row[scheme.range(m)]).1).collect();
            EncodedCodes::new(codes, k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tree(rng: &mut impl Rng, levels: u32, sub_dim: usize) -> BdtTree {
        let nodes =
            (0..(1usize << levels) - 1).map(|_| BdtNode::new(rng.random_range(0..sub_dim), rng.random())).collect();
        BdtTree::new(levels, sub_dim, nodes).unwrap()
    }

    // Independent recursive walk over the level-ordered node list.
    fn walk(nodes: &[BdtNode], x: &[u8], idx: usize, depth: u32, levels: u32, acc: u32) -> u32 {
        if depth == levels {
            return acc;
        }
        let n = nodes[idx];
        if x[n.split_dim] >= n.threshold {
            walk(nodes, x, 2 * idx + 2, depth + 1, levels, acc * 2 + 1)
        } else {
            walk(nodes, x, 2 * idx + 1, depth + 1, levels, acc * 2)
        }
    }

    #[test]
    fn zero_thresholds_give_all_ones() {
        let tree = BdtTree::uniform(4, 9, 3, 0).unwrap();
        for v in [0u8, 1, 128, 255] {
            assert_eq!(bdt_encode(&[v; 9], &tree).unwrap(), 15);
        }
    }

    #[test]
    fn out_of_range_split_rejected_at_construction() {
        let mut nodes = vec![BdtNode::new(0, 10); 15];
        nodes[7].split_dim = 9;
        assert!(BdtTree::new(4, 9, nodes).is_err());
        assert!(BdtTree::new(4, 9, vec![BdtNode::new(0, 1); 14]).is_err());
    }

    #[test]
    fn only_path_elements_matter() {
        // Root reads a0, level 1 reads a3, level 2 reads a6, level 3 reads a7.
        let mut nodes = Vec::new();
        for (level, dim) in [0usize, 3, 6, 7].iter().enumerate() {
            for _ in 0..(1 << level) {
                nodes.push(BdtNode::new(*dim, 100));
            }
        }
        let tree = BdtTree::new(4, 9, nodes).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x: Vec<u8> = (0..9).map(|_| rng.random()).collect();
            let code = bdt_encode(&x, &tree).unwrap();
            for unread in [1usize, 2, 4, 5, 8] {
                let mut y = x.clone();
                y[unread] = rng.random();
                assert_eq!(bdt_encode(&y, &tree).unwrap(), code);
            }
        }
    }

    #[test]
    fn matches_recursive_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for levels in 1..=6 {
            for _ in 0..100 {
                let tree = random_tree(&mut rng, levels, 9);
                let x: Vec<u8> = (0..9).map(|_| rng.random()).collect();
                let want = walk(tree.nodes(), &x, 0, 0, levels, 0);
                assert_eq!(bdt_encode(&x, &tree).unwrap() as u32, want);
            }
        }
    }

    #[test]
    fn short_subvector_rejected() {
        let tree = BdtTree::uniform(4, 9, 0, 1).unwrap();
        assert!(bdt_encode(&[1; 8], &tree).is_err());
    }

    #[test]
    fn encode_all_single_row_whole_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tree = random_tree(&mut rng, 4, 9);
        let scheme = PartitionScheme::new(9, 1).unwrap();
        let row: Vec<u8> = (0..9).map(|_| rng.random()).collect();
        let x = Array2::from_shape_vec((1, 9), row.clone()).unwrap();
        let codes = encode_all(x.view(), &scheme, std::slice::from_ref(&tree)).unwrap();
        assert_eq!(codes[0].as_slice(), &[bdt_encode(&row, &tree).unwrap()]);
    }

    #[test]
    fn encode_all_matches_row_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let scheme = PartitionScheme::new(36, 4).unwrap();
        let trees: Vec<_> = (0..4).map(|_| random_tree(&mut rng, 4, 9)).collect();
        let x = Array2::from_shape_fn((100, 36), |_| rng.random::<u8>());
        let batch = encode_all(x.view(), &scheme, &trees).unwrap();
        for (i, row) in x.rows().into_iter().enumerate() {
            let row = row.to_vec();
            let single: Vec<u8> = (0..4).map(|m| bdt_encode(&row[m * 9..(m + 1) * 9], &trees[m]).unwrap()).collect();
            assert_eq!(batch[i].as_slice(), single.as_slice());
        }
        // identical rows, identical codes
        let dup = Array2::from_shape_fn((2, 36), |(_, c)| c as u8 * 7);
        let codes = encode_all(dup.view(), &scheme, &trees).unwrap();
        assert_eq!(codes[0], codes[1]);
    }

    #[test]
    fn encode_all_rejects_mismatch() {
        let scheme = PartitionScheme::new(36, 4).unwrap();
        let trees = vec![BdtTree::uniform(4, 9, 0, 1).unwrap(); 3];
        let x = Array2::<u8>::zeros((2, 36));
        assert!(encode_all(x.view(), &scheme, &trees).is_err());
        let trees = vec![BdtTree::uniform(4, 9, 0, 1).unwrap(); 4];
        let x = Array2::<u8>::zeros((2, 35));
        assert!(encode_all(x.view(), &scheme, &trees).is_err());
    }

    proptest! {
        #[test]
        fn codes_in_range(levels in 1u32..=8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = random_tree(&mut rng, levels, 5);
            let x: Vec<u8> = (0..5).map(|_| rng.random()).collect();
            let code = bdt_encode(&x, &tree).unwrap() as usize;
            prop_assert!(code < (1 << levels));
        }
    }
}
