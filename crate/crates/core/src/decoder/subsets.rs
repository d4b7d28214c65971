//! Best-first enumeration of the cheapest subsets over several sorted cost
//! lists at once.
//!
//! Within one list, subsets are generated from `{0}` by two moves on the
//! largest element `j`: append `j + 1`, or replace `j` by `j + 1`. Every
//! non-empty subset is reached exactly once and a move never lowers the
//! cost, so popping a min-heap yields subsets in nondecreasing cost order.
//! Each list carries a base cost; the search interleaves all lists.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy)]
struct Node {
    last: usize,
    /// Node whose subset equals this one without `last`.
    prefix: Option<usize>,
    size: usize,
}

#[derive(Clone, Copy)]
struct Source {
    base: f64,
    offset: usize,
    len: usize,
    parity: Option<usize>,
}

#[derive(Clone, Copy)]
struct Entry {
    cost: f64,
    source: usize,
    /// `None` is the empty subset.
    node: Option<usize>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap pops the cheapest, then the lowest source, then
    // the earliest generated
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.source.cmp(&self.source))
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Reusable search state; buffers persist across calls.
#[derive(Default)]
pub(crate) struct SubsetSearch {
    costs: Vec<f64>,
    sources: Vec<Source>,
    nodes: Vec<Node>,
    heap: BinaryHeap<Entry>,
    found: Vec<Entry>,
}

impl SubsetSearch {
    pub(crate) fn clear(&mut self) {
        self.costs.clear();
        self.sources.clear();
        self.nodes.clear();
        self.heap.clear();
        self.found.clear();
    }

    /// Registers a cost list (sorted ascending, non-negative) with a base
    /// cost. With `parity = Some(p)` only subsets of size `≡ p (mod 2)`
    /// are admitted.
    pub(crate) fn add_source(&mut self, base: f64, costs: &[f64], parity: Option<usize>) {
        debug_assert!(costs.windows(2).all(|w| w[0] <= w[1]));
        self.sources.push(Source {
            base,
            offset: self.costs.len(),
            len: costs.len(),
            parity,
        });
        self.costs.extend_from_slice(costs);
    }

    /// Finds the `limit` cheapest admitted subsets over all sources, in
    /// nondecreasing total cost. Returns the number found.
    pub(crate) fn run(&mut self, limit: usize) -> usize {
        self.nodes.clear();
        self.heap.clear();
        self.found.clear();
        for (source, s) in self.sources.iter().enumerate() {
            self.heap.push(Entry {
                cost: s.base,
                source,
                node: None,
            });
        }
        while self.found.len() < limit {
            let Some(entry) = self.heap.pop() else {
                break;
            };
            let src = self.sources[entry.source];
            let costs = &self.costs[src.offset..src.offset + src.len];
            let size = match entry.node {
                None => {
                    if !costs.is_empty() {
                        self.push(entry.cost + costs[0], entry.source, 0, None, 1);
                    }
                    0
                }
                Some(node) => {
                    let cur = self.nodes[node];
                    let next = cur.last + 1;
                    if next < costs.len() {
                        let grow = entry.cost + costs[next];
                        let shift = entry.cost - costs[cur.last] + costs[next];
                        self.push(grow, entry.source, next, Some(node), cur.size + 1);
                        self.push(shift, entry.source, next, cur.prefix, cur.size);
                    }
                    cur.size
                }
            };
            if src.parity.is_none_or(|p| size % 2 == p % 2) {
                self.found.push(entry);
            }
        }
        self.found.len()
    }

    fn push(&mut self, cost: f64, source: usize, last: usize, prefix: Option<usize>, size: usize) {
        let node = self.nodes.len();
        self.nodes.push(Node { last, prefix, size });
        self.heap.push(Entry {
            cost,
            source,
            node: Some(node),
        });
    }

    pub(crate) fn cost(&self, r: usize) -> f64 {
        self.found[r].cost
    }

    pub(crate) fn source(&self, r: usize) -> usize {
        self.found[r].source
    }

    /// Elements of the `r`-th subset found, largest first.
    pub(crate) fn members(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.found[r].node, move |&n| self.nodes[n].prefix)
            .map(move |n| self.nodes[n].last)
    }
}
