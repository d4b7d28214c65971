//! Fast simplified SCL decoding on the pruned polar factor tree.
//!
//! Paths do not keep a bit history. Information bits that feed dynamic
//! frozen bits are re-encoded from the node partial sums when their node is
//! decided (IBE) and stored with that node's survivor record. A dynamic
//! frozen bit is evaluated by following the survivors' origin pointers back
//! to the record of each source bit (DR).

use std::collections::BTreeMap;

use super::subsets::SubsetSearch;
use super::tree::{build_pft, NodeKind, PolarFactorTree};
use super::{f_func, g_func, hd, rank_paths, DecodedPath, DecoderConfig};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::polar::polar_transform_bits;
use crate::pretransform::PolarCode;

const NOT_DECISION: usize = usize::MAX;

/// Dynamic frozen bit of a node: local position and the `(record, slot)`
/// locations of its source bits.
#[derive(Clone, Debug)]
struct DynamicBit {
    local: usize,
    sources: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
struct NodePlan {
    kind: NodeKind,
    layer: usize,
    info: Vec<bool>,
    dynamic: Vec<DynamicBit>,
    /// Node-local positions of bits extracted for later dynamic frozen bits.
    extract: Vec<usize>,
}

/// Decoder bound to one code; the tree and frozen plan are built once.
#[derive(Clone, Debug)]
pub struct FastDecoder {
    n: usize,
    config: DecoderConfig,
    tree: PolarFactorTree,
    plans: Vec<NodePlan>,
    decision: Vec<usize>,
}

/// One list entry. Layer `s` of each buffer lives at `[2^s, 2^(s+1))`.
#[derive(Clone, Default)]
struct Path {
    alpha: Vec<f64>,
    beta: Vec<u8>,
    /// Left-child partial sums kept for the pending `g` and combine steps.
    left: Vec<u8>,
    pm: f64,
}

impl Path {
    /// Copies the state still needed after a decision in `layer`: LLRs of
    /// the layers above and pending left partial sums from `layer` up.
    /// Everything else is rewritten before it is read again.
    fn copy_from(&mut self, other: &Path, layer: usize) {
        let from = 2usize << layer;
        let len = other.alpha.len();
        if self.alpha.len() != len {
            self.alpha.resize(len, 0.0);
            self.beta.resize(len, 0);
            self.left.resize(len, 0);
        }
        self.alpha[from..].copy_from_slice(&other.alpha[from..]);
        self.left[from / 2..].copy_from_slice(&other.left[from / 2..]);
        self.pm = other.pm;
    }
}

/// Survivors of one decision point: for each surviving path its parent in
/// the previous list and the extracted source bits (`stride` per path).
struct Record {
    origins: Vec<usize>,
    values: Vec<u8>,
    stride: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    parent: usize,
    pm: f64,
    /// Generation order, for tie-breaking.
    seq: usize,
    source: Source,
}

/// Where the candidate partial sums come from.
#[derive(Clone, Copy)]
enum Source {
    /// Stored in the shared bit buffer at this offset.
    Bits(usize),
    /// Hard decision of the parent LLRs with the positions
    /// `flips[start..start + len]` inverted.
    Flips { start: usize, len: usize },
}

/// Per-frame scratch space for candidate generation.
#[derive(Default)]
struct Scratch {
    candidates: Vec<Candidate>,
    bits: Vec<u8>,
    flips: Vec<usize>,
    delta: Vec<u8>,
    order: Vec<usize>,
    costs: Vec<f64>,
    search: SubsetSearch,
    u: Vec<u8>,
}

impl FastDecoder {
    pub fn new(code: &PolarCode, config: DecoderConfig) -> Result<Self> {
        config.validate()?;
        let n = code.n();
        let fs = code.frozen_structure();
        let tree = build_pft(code.profile(), &fs, config.special_nodes);

        let mut sources: Vec<usize> = fs.dependencies.values().flatten().copied().collect();
        sources.sort_unstable();
        sources.dedup();
        let mut slot_of = BTreeMap::new();
        let mut extract = vec![Vec::new(); tree.nodes().len()];
        for &r in &sources {
            let t = tree.node_of_bit(r);
            let node = &tree.nodes()[t];
            slot_of.insert(r, (t, extract[t].len()));
            extract[t].push(r - node.start);
        }

        let mut decision = vec![NOT_DECISION; (2usize << n) - 1];
        let mut plans = Vec::with_capacity(tree.nodes().len());
        for (t, node) in tree.nodes().iter().enumerate() {
            decision[node.v] = t;
            let dynamic = node
                .dynamic
                .iter()
                .map(|&local| {
                    let deps = &fs.dependencies[&(node.start + local)];
                    let sources = deps.iter().map(|r| slot_of[r]).collect::<Vec<_>>();
                    debug_assert!(sources.iter().all(|&(tr, _)| tr < t));
                    DynamicBit { local, sources }
                })
                .collect();
            plans.push(NodePlan {
                kind: node.kind,
                layer: node.layer,
                info: node.bits().map(|i| code.profile().is_info(i)).collect(),
                dynamic,
                extract: std::mem::take(&mut extract[t]),
            });
        }
        Ok(Self {
            n,
            config,
            tree,
            plans,
            decision,
        })
    }

    pub fn tree(&self) -> &PolarFactorTree {
        &self.tree
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    /// Decodes one frame of channel LLRs. Output paths are sorted by
    /// ascending path metric.
    pub fn decode(&self, llr: &[f64]) -> Result<Vec<DecodedPath>> {
        let len = 1usize << self.n;
        if llr.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: llr.len(),
            });
        }
        let mut root = Path {
            alpha: vec![0.0; 2 * len],
            beta: vec![0; 2 * len],
            left: vec![0; 2 * len],
            pm: 0.0,
        };
        root.alpha[len..].copy_from_slice(llr);
        let mut run = Run {
            dec: self,
            paths: vec![root],
            spare: Vec::new(),
            records: Vec::with_capacity(self.plans.len()),
            scratch: Scratch::default(),
        };
        run.visit(0, self.n);
        let mut out: Vec<DecodedPath> = run
            .paths
            .iter()
            .map(|p| {
                let mut u = p.beta[len..].to_vec();
                polar_transform_bits(&mut u);
                DecodedPath {
                    u: BitVector::from_bits(u.iter().map(|&b| b == 1)),
                    pm: p.pm,
                }
            })
            .collect();
        rank_paths(&mut out);
        Ok(out)
    }
}

struct Run<'a> {
    dec: &'a FastDecoder,
    paths: Vec<Path>,
    spare: Vec<Path>,
    records: Vec<Record>,
    scratch: Scratch,
}

impl Run<'_> {
    fn visit(&mut self, v: usize, layer: usize) {
        let t = self.dec.decision[v];
        if t != NOT_DECISION {
            self.decide(t);
            return;
        }
        let half = 1usize << (layer - 1);
        let variant = self.dec.config.f_variant;
        for p in &mut self.paths {
            let (lo, hi) = p.alpha.split_at_mut(2 * half);
            let (a, b) = hi[..2 * half].split_at(half);
            for ((out, &x), &y) in lo[half..].iter_mut().zip(a).zip(b) {
                *out = f_func(variant, x, y);
            }
        }
        self.visit(2 * v + 1, layer - 1);
        for p in &mut self.paths {
            p.left[half..2 * half].copy_from_slice(&p.beta[half..2 * half]);
            let (lo, hi) = p.alpha.split_at_mut(2 * half);
            let (a, b) = hi[..2 * half].split_at(half);
            for (((out, &x), &y), &beta) in lo[half..].iter_mut().zip(a).zip(b).zip(&p.left[half..2 * half]) {
                *out = g_func(x, y, beta);
            }
        }
        self.visit(2 * v + 2, layer - 1);
        for p in &mut self.paths {
            let (lo, hi) = p.beta.split_at_mut(2 * half);
            let right = &lo[half..];
            let left = &p.left[half..2 * half];
            for j in 0..half {
                hi[j] = left[j] ^ right[j];
                hi[half + j] = right[j];
            }
        }
    }

    fn decide(&mut self, t: usize) {
        let dec = self.dec;
        let plan = &dec.plans[t];
        let list_size = dec.config.list_size;
        let size = 1usize << plan.layer;
        let range = size..2 * size;
        let sc = &mut self.scratch;
        sc.candidates.clear();
        sc.bits.clear();
        sc.flips.clear();
        sc.order.clear();
        sc.search.clear();
        for (l, p) in self.paths.iter().enumerate() {
            dynamic_vector(plan, &self.records, t, l, &mut sc.delta);
            node_candidates(plan, &p.alpha[range.clone()], l, p.pm, dec.config.flip_threshold, sc);
        }
        if matches!(plan.kind, NodeKind::Rate1 | NodeKind::Spc) {
            let found = sc.search.run(list_size);
            for r in 0..found {
                let parent = sc.search.source(r);
                let order = &sc.order[parent * size..(parent + 1) * size];
                let start = sc.flips.len();
                sc.flips.extend(sc.search.members(r).map(|m| order[m]));
                sc.candidates.push(Candidate {
                    parent,
                    pm: sc.search.cost(r),
                    seq: r,
                    source: Source::Flips {
                        start,
                        len: sc.flips.len() - start,
                    },
                });
            }
        }
        let cands = &mut sc.candidates;
        let key = |a: &Candidate, b: &Candidate| a.pm.total_cmp(&b.pm).then(a.seq.cmp(&b.seq));
        if cands.len() > list_size {
            cands.select_nth_unstable_by(list_size - 1, key);
            cands.truncate(list_size);
        }
        cands.sort_unstable_by(key);

        let mut last_use = vec![usize::MAX; self.paths.len()];
        for (idx, c) in cands.iter().enumerate() {
            last_use[c.parent] = idx;
        }
        let stride = plan.extract.len();
        let mut origins = Vec::with_capacity(cands.len());
        let mut values = Vec::with_capacity(cands.len() * stride);
        let mut next = Vec::with_capacity(cands.len());
        for (idx, c) in cands.iter().enumerate() {
            let mut p = if last_use[c.parent] == idx {
                std::mem::take(&mut self.paths[c.parent])
            } else {
                let mut p = self.spare.pop().unwrap_or_default();
                p.copy_from(&self.paths[c.parent], plan.layer);
                p
            };
            match c.source {
                Source::Bits(slot) => p.beta[range.clone()].copy_from_slice(&sc.bits[slot..slot + size]),
                Source::Flips { start, len } => {
                    let alpha = if last_use[c.parent] == idx {
                        &p.alpha[range.clone()]
                    } else {
                        &self.paths[c.parent].alpha[range.clone()]
                    };
                    for (b, &a) in p.beta[range.clone()].iter_mut().zip(alpha) {
                        *b = hd(a);
                    }
                    for &j in &sc.flips[start..start + len] {
                        p.beta[size + j] ^= 1;
                    }
                }
            }
            let beta = &p.beta[range.clone()];
            p.pm = c.pm;
            if stride > 0 {
                sc.u.clear();
                sc.u.extend_from_slice(beta);
                polar_transform_bits(&mut sc.u);
                values.extend(plan.extract.iter().map(|&i| sc.u[i]));
            }
            origins.push(c.parent);
            next.push(p);
        }
        for (l, p) in std::mem::replace(&mut self.paths, next).into_iter().enumerate() {
            if last_use[l] == usize::MAX {
                self.spare.push(p);
            }
        }
        self.records.push(Record {
            origins,
            values,
            stride,
        });
    }
}

/// Dynamic frozen vector `δ` of path `l` for node `t`, assembled by
/// following origin pointers back to each source bit's record.
fn dynamic_vector(plan: &NodePlan, records: &[Record], t: usize, l: usize, delta: &mut Vec<u8>) {
    delta.clear();
    delta.resize(1 << plan.layer, 0);
    for bit in &plan.dynamic {
        let mut value = 0;
        for &(tr, slot) in &bit.sources {
            let mut idx = l;
            for rec in records[tr + 1..t].iter().rev() {
                idx = rec.origins[idx];
            }
            let rec = &records[tr];
            value ^= rec.values[idx * rec.stride + slot];
        }
        delta[bit.local] = value;
    }
}

fn penalty(alpha: &[f64], beta: &[u8]) -> f64 {
    alpha
        .iter()
        .zip(beta)
        .filter(|(&a, &b)| hd(a) != b)
        .map(|(a, _)| a.abs())
        .sum()
}

/// Appends the candidates of one path for one node, or registers the path
/// with the subset search for Rate-1 and SPC nodes. Uses the dynamic frozen
/// vector in `sc.delta`.
fn node_candidates(
    plan: &NodePlan,
    alpha: &[f64],
    parent: usize,
    pm: f64,
    threshold: Option<f64>,
    sc: &mut Scratch,
) {
    let size = alpha.len();
    let push = |sc: &mut Scratch, pm: f64| {
        let source = Source::Bits(sc.bits.len() - size);
        let seq = sc.candidates.len();
        sc.candidates.push(Candidate { parent, pm, seq, source });
    };
    match plan.kind {
        NodeKind::Leaf => {
            let a = alpha[0];
            if plan.info[0] {
                sc.bits.push(hd(a));
                push(sc, pm);
                sc.bits.push(1 - hd(a));
                push(sc, pm + a.abs());
            } else {
                let bit = sc.delta[0];
                sc.bits.push(bit);
                push(sc, if bit != hd(a) { pm + a.abs() } else { pm });
            }
        }
        NodeKind::Rate0 => {
            let start = sc.bits.len();
            sc.bits.extend_from_slice(&sc.delta);
            polar_transform_bits(&mut sc.bits[start..]);
            let pen = penalty(alpha, &sc.bits[start..]);
            push(sc, pm + pen);
        }
        NodeKind::Rep => {
            let start = sc.bits.len();
            sc.bits.extend_from_slice(&sc.delta);
            polar_transform_bits(&mut sc.bits[start..]);
            let s: f64 = alpha
                .iter()
                .zip(&sc.bits[start..])
                .map(|(&a, &c)| if c == 1 { -a } else { a })
                .sum();
            let flip = hd(s);
            for b in &mut sc.bits[start..] {
                *b ^= flip;
            }
            let p1 = pm + penalty(alpha, &sc.bits[start..]);
            push(sc, p1);
            sc.bits.extend_from_within(start..start + size);
            let second = start + size;
            for b in &mut sc.bits[second..] {
                *b ^= 1;
            }
            let p2 = pm + penalty(alpha, &sc.bits[second..]);
            push(sc, p2);
        }
        NodeKind::Rate1 | NodeKind::Spc => {
            // candidates are drawn later by one search over all paths
            let offset = sc.order.len();
            sc.order.extend(0..size);
            sc.order[offset..].sort_by(|&x, &y| alpha[x].abs().total_cmp(&alpha[y].abs()));
            sc.costs.clear();
            sc.costs.extend(sc.order[offset..].iter().map(|&j| alpha[j].abs()));
            let parity = (plan.kind == NodeKind::Spc).then(|| {
                let gamma = alpha.iter().fold(sc.delta[0], |acc, &a| acc ^ hd(a));
                usize::from(gamma)
            });
            let eligible = match threshold {
                Some(t) => sc.costs.partition_point(|&c| c <= t).max(usize::from(parity.is_some())),
                None => size,
            };
            sc.search.add_source(pm, &sc.costs[..eligible], parity);
        }
        NodeKind::Branch => unreachable!("branch nodes are never decision nodes"),
    }
}
