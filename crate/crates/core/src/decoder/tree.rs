//! Pruned polar factor tree.
//!
//! Nodes are numbered in heap order: the root is node 0 in layer `n`, and
//! node `v` has children `2v + 1` and `2v + 2`. Layer `s` holds nodes
//! `2^(n-s) - 1 .. 2^(n-s+1) - 1`, each covering `2^s` consecutive bits.

use serde::Serialize;

use super::SpecialNodes;
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::polar::RateProfile;
use crate::pretransform::FrozenStructure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    Branch,
    Rate0,
    Rate1,
    Rep,
    Spc,
    Leaf,
}

/// A decision node of the pruned tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub v: usize,
    pub layer: usize,
    pub start: usize,
    pub kind: NodeKind,
    /// Node-local positions of dynamic frozen bits.
    pub dynamic: Vec<usize>,
}

impl TreeNode {
    pub fn size(&self) -> usize {
        1 << self.layer
    }

    pub fn bits(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.size()
    }
}

/// Global index of local bit `i_v` of node `v` in layer `s`:
/// `2^s * v + 2^s - N + i_v`.
pub fn node_bit_index(v: usize, s: usize, i_v: usize, n: usize) -> Result<usize> {
    if s > n {
        return Err(Error::Precondition(format!("layer {s} above root layer {n}")));
    }
    let first = (1usize << (n - s)) - 1;
    if v < first || v > 2 * first {
        return Err(Error::Precondition(format!("node {v} is not in layer {s}")));
    }
    if i_v >= 1 << s {
        return Err(Error::IndexOutOfRange {
            index: i_v,
            len: 1 << s,
        });
    }
    Ok((v << s) + (1 << s) + i_v - (1 << n))
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarFactorTree {
    n: usize,
    #[serde(skip)]
    info: BitVector,
    special: SpecialNodes,
    nodes: Vec<TreeNode>,
}

impl PolarFactorTree {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Decision nodes in decoding order; their bit ranges tile `Z_N`.
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Constituent-code type of any node `v` from its frozen/information
    /// pattern, ignoring pruning switches. Dynamic frozen bits count as
    /// frozen.
    pub fn classify(&self, v: usize) -> Result<NodeKind> {
        let (layer, start) = locate(v, self.n)?;
        Ok(pattern_kind(&self.info, start, 1 << layer))
    }

    /// Decision node containing bit `i`.
    pub fn node_of_bit(&self, i: usize) -> usize {
        self.nodes.partition_point(|node| node.start + node.size() <= i)
    }
}

fn locate(v: usize, n: usize) -> Result<(usize, usize)> {
    let depth = (usize::BITS - (v + 1).leading_zeros() - 1) as usize;
    if depth > n {
        return Err(Error::Precondition(format!("node {v} deeper than the tree")));
    }
    let layer = n - depth;
    let start = (v + 1 - (1 << depth)) << layer;
    Ok((layer, start))
}

fn pattern_kind(info: &BitVector, start: usize, size: usize) -> NodeKind {
    let ones = info.ones_in(start, start + size).count();
    if size == 1 {
        return NodeKind::Leaf;
    }
    if ones == 0 {
        NodeKind::Rate0
    } else if ones == size {
        NodeKind::Rate1
    } else if ones == 1 && info.get(start + size - 1) {
        NodeKind::Rep
    } else if ones == size - 1 && !info.get(start) {
        NodeKind::Spc
    } else {
        NodeKind::Branch
    }
}

pub fn build_pft(
    profile: &RateProfile,
    frozen: &FrozenStructure,
    special: SpecialNodes,
) -> PolarFactorTree {
    let n = profile.n();
    let info = profile.info_mask().clone();
    let mut nodes = Vec::new();
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        let (layer, start) = locate(v, n).expect("node in tree");
        let size = 1usize << layer;
        let kind = pattern_kind(&info, start, size);
        let enabled = size <= special.max_size
            && match kind {
                NodeKind::Rate0 => special.rate0,
                NodeKind::Rate1 => special.rate1,
                NodeKind::Rep => special.rep,
                NodeKind::Spc => special.spc,
                NodeKind::Leaf => true,
                NodeKind::Branch => false,
            };
        if enabled {
            let dynamic = (0..size)
                .filter(|&i| frozen.is_dynamic(start + i))
                .collect();
            nodes.push(TreeNode {
                v,
                layer,
                start,
                kind,
                dynamic,
            });
        } else {
            stack.push(2 * v + 2);
            stack.push(2 * v + 1);
        }
    }
    PolarFactorTree {
        n,
        info,
        special,
        nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretransform::{PolarCode, RowMergeSet};

    fn toy() -> PolarCode {
        let p = RateProfile::new(4, [5, 6, 7, 11, 13, 14, 15]).unwrap();
        PolarCode::row_merged(p, &RowMergeSet::new(vec![(5, 10), (6, 12)])).unwrap()
    }

    #[test]
    fn node_index_examples() {
        assert_eq!(node_bit_index(5, 2, 0, 4).unwrap(), 8);
        assert_eq!(node_bit_index(4, 2, 3, 4).unwrap(), 7);
        for i in 0..16 {
            assert_eq!(node_bit_index(15 + i, 0, 0, 4).unwrap(), i);
        }
        assert!(node_bit_index(2, 2, 0, 4).is_err());
        for v in 0..31 {
            let (layer, start) = locate(v, 4).unwrap();
            assert_eq!(node_bit_index(v, layer, 0, 4).unwrap(), start);
        }
    }

    #[test]
    fn toy_tree() {
        let code = toy();
        let t = build_pft(code.profile(), &code.frozen_structure(), SpecialNodes::default());
        let kinds: Vec<(usize, NodeKind)> = t.nodes().iter().map(|n| (n.v, n.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (3, NodeKind::Rate0),
                (4, NodeKind::Spc),
                (5, NodeKind::Rep),
                (6, NodeKind::Spc)
            ]
        );
        assert_eq!(t.classify(14).unwrap(), NodeKind::Rate1);
        assert_eq!(t.nodes()[2].dynamic, vec![2]);
        assert_eq!(t.nodes()[3].dynamic, vec![0]);
        assert_eq!(t.node_of_bit(10), 2);
    }

    #[test]
    fn trivial_trees() {
        let zero = RateProfile::new(3, []).unwrap();
        let fs = PolarCode::plain(zero.clone()).frozen_structure();
        let t = build_pft(&zero, &fs, SpecialNodes::default());
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.nodes()[0].kind, NodeKind::Rate0);
        let full = RateProfile::full(3).unwrap();
        let fs = PolarCode::plain(full.clone()).frozen_structure();
        let t = build_pft(&full, &fs, SpecialNodes::default());
        assert_eq!(t.nodes()[0].kind, NodeKind::Rate1);
        let t = build_pft(&full, &fs, SpecialNodes::none());
        assert_eq!(t.nodes().len(), 8);
        assert!(t.nodes().iter().all(|n| n.kind == NodeKind::Leaf));
    }

    #[test]
    fn size_two_frozen_info_is_rep() {
        let p = RateProfile::new(1, [1]).unwrap();
        let fs = PolarCode::plain(p.clone()).frozen_structure();
        let t = build_pft(&p, &fs, SpecialNodes::default());
        assert_eq!(t.nodes()[0].kind, NodeKind::Rep);
    }
}
