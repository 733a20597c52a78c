#![allow(dead_code)]

use mtroute_core::graph::{Link, LinkId, Network, NodeId, NodeKind};
use proptest::prelude::*;

/// Directed link spec: (src, dst, delay, weight).
pub type Spec = (usize, usize, u32, u32);

pub fn build(n: usize, links: &[Spec]) -> Network {
    let mut b = Network::builder();
    for i in 0..n {
        b.node(format!("n{i}"), NodeKind::Router);
    }
    for &(s, d, delay, w) in links {
        b.link(format!("n{s}"), format!("n{d}"), f64::from(10 + w), delay);
    }
    b.build().unwrap()
}

/// Random digraphs with `2..=max_nodes` nodes; each ordered pair carries a
/// link with probability about `density`. Returns the node count and links.
pub fn specs(max_nodes: usize, max_delay: u32, density: f64) -> impl Strategy<Value = (usize, Vec<Spec>)> {
    (2..=max_nodes).prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|(a, b)| a != b).collect();
        let m = pairs.len();
        (
            Just(n),
            Just(pairs),
            proptest::collection::vec(proptest::option::weighted(density, (1..=max_delay, 0u32..=30)), m),
        )
            .prop_map(|(n, pairs, opts)| {
                let links = pairs
                    .into_iter()
                    .zip(opts)
                    .filter_map(|((a, b), o)| o.map(|(d, w)| (a, b, d, w)))
                    .collect();
                (n, links)
            })
    })
}

pub fn link(net: &Network, id: LinkId) -> &Link {
    net.link(id)
}

/// Every simple path from `s` (node sequences, including the trivial one).
pub fn simple_paths_from(net: &Network, s: NodeId) -> Vec<Vec<NodeId>> {
    fn go(net: &Network, seq: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        out.push(seq.clone());
        let at = *seq.last().unwrap();
        for (_, l) in net.links() {
            if l.src == at && !seq.contains(&l.dst) {
                seq.push(l.dst);
                go(net, seq, out);
                seq.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(net, &mut vec![s], &mut out);
    out
}

/// Links along a node sequence.
pub fn links_of(net: &Network, seq: &[NodeId]) -> Vec<LinkId> {
    seq.windows(2)
        .map(|w| {
            net.links()
                .find(|(_, l)| l.src == w[0] && l.dst == w[1])
                .map(|(id, _)| id)
                .unwrap()
        })
        .collect()
}

pub fn delay_of(net: &Network, seq: &[NodeId]) -> u32 {
    links_of(net, seq).iter().map(|&l| net.link(l).delay_ms).sum()
}
