//! Dijkstra with deterministic tie-breaking.
//!
//! Labels are ordered by total weight first and, among equal weights, by the
//! lexicographic order of the key sequence of the path from the source. The
//! graphs handled here are small (tens to a few hundred nodes), so the search
//! keeps the full key sequence per label and scans for the minimum instead of
//! using a heap.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Two weights closer than this (relative to their magnitude) count as equal.
const WEIGHT_TOLERANCE: f64 = 1e-9;

pub(crate) fn weights_equal(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= WEIGHT_TOLERANCE * scale
}

pub(crate) fn cmp_label<K: Ord>(da: f64, sa: &[K], db: f64, sb: &[K]) -> Ordering {
    if weights_equal(da, db) {
        sa.cmp(sb)
    } else if da < db {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// An arc offered to the search: `(arc id, head node, weight)`.
pub(crate) type ArcRef = (usize, usize, f64);

pub(crate) struct SearchTree<K> {
    dist: Vec<f64>,
    pred: Vec<Option<(usize, usize)>>,
    seq: Vec<Vec<K>>,
}

impl<K: Ord + Copy> SearchTree<K> {
    pub(crate) fn reached(&self, node: usize) -> bool {
        self.dist[node].is_finite()
    }

    pub(crate) fn dist(&self, node: usize) -> f64 {
        self.dist[node]
    }

    pub(crate) fn sequence(&self, node: usize) -> &[K] {
        &self.seq[node]
    }

    /// Arc ids of the tree path from the source to `node`, in travel order.
    pub(crate) fn arcs_to(&self, node: usize) -> Option<Vec<usize>> {
        if !self.reached(node) {
            return None;
        }
        let mut arcs = Vec::new();
        let mut cur = node;
        while let Some((arc, prev)) = self.pred[cur] {
            arcs.push(arc);
            cur = prev;
        }
        arcs.reverse();
        Some(arcs)
    }
}

/// Single-source search over `node_count` nodes.
///
/// `arcs(u, out)` pushes the arcs leaving `u`; nodes for which it pushes
/// nothing are dead ends. Weights must be finite and non-negative.
pub(crate) fn lex_dijkstra<K, KF, AF>(node_count: usize, source: usize, key: KF, mut arcs: AF) -> SearchTree<K>
where
    K: Ord + Copy,
    KF: Fn(usize) -> K,
    AF: FnMut(usize, &mut Vec<ArcRef>),
{
    let mut dist = vec![f64::INFINITY; node_count];
    let mut pred = vec![None; node_count];
    let mut seq: Vec<Vec<K>> = vec![Vec::new(); node_count];
    let mut settled = vec![false; node_count];

    dist[source] = 0.0;
    seq[source].push(key(source));

    let mut scratch = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for v in 0..node_count {
            if settled[v] || !dist[v].is_finite() {
                continue;
            }
            best = match best {
                None => Some(v),
                Some(b) if cmp_label(dist[v], &seq[v], dist[b], &seq[b]) == Ordering::Less => Some(v),
                keep => keep,
            };
        }
        let Some(u) = best else { break };
        settled[u] = true;

        scratch.clear();
        arcs(u, &mut scratch);
        for &(arc, head, w) in &scratch {
            if settled[head] {
                continue;
            }
            let cand = dist[u] + w;
            let better = if !dist[head].is_finite() {
                true
            } else {
                let mut cand_seq = seq[u].clone();
                cand_seq.push(key(head));
                cmp_label(cand, &cand_seq, dist[head], &seq[head]) == Ordering::Less
            };
            if better {
                let mut s = seq[u].clone();
                s.push(key(head));
                seq[head] = s;
                dist[head] = cand;
                pred[head] = Some((arc, u));
            }
        }
    }

    SearchTree { dist, pred, seq }
}
