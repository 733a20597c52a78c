//! Directed network model, simple paths, shortest paths and load bookkeeping.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::search;

/// Index of a node. Node indices follow the lexicographic order of node ids,
/// so comparing `NodeId`s compares the ids they stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Index of a directed link. Links are ordered by `(src, dst)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Router,
    Gateway,
    Enb,
    Relay,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Router => "router",
            NodeKind::Gateway => "gateway",
            NodeKind::Enb => "eNB",
            NodeKind::Relay => "relay",
        }
    }

    pub fn parse(s: &str) -> Option<NodeKind> {
        match s {
            "router" => Some(NodeKind::Router),
            "gateway" => Some(NodeKind::Gateway),
            "eNB" | "enb" => Some(NodeKind::Enb),
            "relay" => Some(NodeKind::Relay),
            _ => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    pub capacity_mbps: f64,
    pub delay_ms: u32,
}

/// Collects nodes and links by name and validates them into a [`Network`].
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    links: Vec<(String, String, f64, u32)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: impl Into<String>, kind: NodeKind) -> &mut Self {
        self.nodes.push(Node { name: name.into(), kind });
        self
    }

    pub fn link(&mut self, src: impl Into<String>, dst: impl Into<String>, capacity_mbps: f64, delay_ms: u32) -> &mut Self {
        self.links.push((src.into(), dst.into(), capacity_mbps, delay_ms));
        self
    }

    /// Adds the two directed links `a -> b` and `b -> a`.
    pub fn duplex(&mut self, a: &str, b: &str, capacity_mbps: f64, delay_ms: u32) -> &mut Self {
        self.link(a, b, capacity_mbps, delay_ms);
        self.link(b, a, capacity_mbps, delay_ms)
    }

    pub fn build(&self) -> Result<Network> {
        let mut nodes = self.nodes.clone();
        nodes.sort_by(|a, b| a.name.cmp(&b.name));
        for pair in nodes.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(Error::DuplicateNode(pair[0].name.clone()));
            }
        }
        let index: BTreeMap<String, NodeId> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.clone(), NodeId(i)))
            .collect();

        let mut links = Vec::with_capacity(self.links.len());
        for (src, dst, capacity, delay) in &self.links {
            let s = *index.get(src).ok_or_else(|| Error::UnknownNode(src.clone()))?;
            let d = *index.get(dst).ok_or_else(|| Error::UnknownNode(dst.clone()))?;
            if s == d {
                return Err(Error::SelfLoop(src.clone()));
            }
            if !(capacity.is_finite() && *capacity > 0.0) {
                return Err(Error::InvalidCapacity {
                    src: src.clone(),
                    dst: dst.clone(),
                    capacity: *capacity,
                });
            }
            if *delay == 0 {
                return Err(Error::InvalidDelay {
                    src: src.clone(),
                    dst: dst.clone(),
                });
            }
            links.push(Link {
                src: s,
                dst: d,
                capacity_mbps: *capacity,
                delay_ms: *delay,
            });
        }
        links.sort_by_key(|l| (l.src, l.dst));
        for pair in links.windows(2) {
            if pair[0].src == pair[1].src && pair[0].dst == pair[1].dst {
                return Err(Error::DuplicateLink {
                    src: nodes[pair[0].src.0].name.clone(),
                    dst: nodes[pair[0].dst.0].name.clone(),
                });
            }
        }
        Ok(Network::assemble(nodes, links))
    }
}

/// An immutable directed network with per-link capacity and integer delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    links: Vec<Link>,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
    by_pair: BTreeMap<(NodeId, NodeId), LinkId>,
}

impl Network {
    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::new()
    }

    fn assemble(nodes: Vec<Node>, links: Vec<Link>) -> Self {
        let mut out_links = alloc::vec![Vec::new(); nodes.len()];
        let mut in_links = alloc::vec![Vec::new(); nodes.len()];
        let mut by_pair = BTreeMap::new();
        for (i, l) in links.iter().enumerate() {
            out_links[l.src.0].push(LinkId(i));
            in_links[l.dst.0].push(LinkId(i));
            by_pair.insert((l.src, l.dst), LinkId(i));
        }
        Network {
            nodes,
            links,
            out_links,
            in_links,
            by_pair,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn links(&self) -> impl ExactSizeIterator<Item = (LinkId, &Link)> {
        self.links.iter().enumerate().map(|(i, l)| (LinkId(i), l))
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id.0].name
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .binary_search_by(|n| n.name.as_str().cmp(name))
            .ok()
            .map(NodeId)
    }

    pub fn require_node(&self, name: &str) -> Result<NodeId> {
        self.node_id(name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Outgoing links of `node`, sorted by head node.
    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node.0]
    }

    pub fn in_links(&self, node: NodeId) -> &[LinkId] {
        &self.in_links[node.0]
    }

    pub fn link_between(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.by_pair.get(&(src, dst)).copied()
    }

    pub fn max_capacity(&self) -> f64 {
        self.links.iter().map(|l| l.capacity_mbps).fold(0.0, f64::max)
    }

    pub fn min_capacity(&self) -> f64 {
        self.links
            .iter()
            .map(|l| l.capacity_mbps)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn link_label(&self, id: LinkId) -> String {
        let l = self.link(id);
        let mut s = String::new();
        s.push_str(self.name(l.src));
        s.push_str("->");
        s.push_str(self.name(l.dst));
        s
    }
}

/// A simple path given by its links, with the node sequence and total delay
/// cached at construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    links: Vec<LinkId>,
    nodes: Vec<NodeId>,
    delay_ms: u32,
}

impl Path {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates that consecutive links share endpoints and that no node
    /// repeats.
    pub fn new(net: &Network, links: Vec<LinkId>) -> Result<Self> {
        if links.is_empty() {
            return Ok(Self::empty());
        }
        let mut nodes = Vec::with_capacity(links.len() + 1);
        nodes.push(net.link(links[0]).src);
        let mut delay = 0u32;
        for &id in &links {
            let l = net.link(id);
            if l.src != *nodes.last().unwrap() {
                return Err(Error::BrokenPath("consecutive links do not share an endpoint"));
            }
            if nodes.contains(&l.dst) {
                return Err(Error::NotSimple(l.dst));
            }
            nodes.push(l.dst);
            delay += l.delay_ms;
        }
        Ok(Path {
            links,
            nodes,
            delay_ms: delay,
        })
    }

    /// Builds a path from a node sequence; every consecutive pair must be a link.
    pub fn from_nodes(net: &Network, nodes: &[NodeId]) -> Result<Self> {
        let links = nodes
            .windows(2)
            .map(|w| {
                net.link_between(w[0], w[1])
                    .ok_or(Error::BrokenPath("no link between consecutive nodes"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(net, links)
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    /// Node sequence from origin to destination; empty for the empty path.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn delay_ms(&self) -> u32 {
        self.delay_ms
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn origin(&self) -> Option<NodeId> {
        self.nodes.first().copied()
    }

    pub fn destination(&self) -> Option<NodeId> {
        self.nodes.last().copied()
    }

    pub fn contains_node(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    pub fn contains_link(&self, link: LinkId) -> bool {
        self.links.contains(&link)
    }

    /// `self` followed by `other`; fails unless the result is a simple path.
    pub fn concat(&self, net: &Network, other: &Path) -> Result<Path> {
        let mut links = self.links.clone();
        links.extend_from_slice(&other.links);
        Path::new(net, links)
    }

    pub fn weight(&self, weights: &[f64]) -> f64 {
        self.links.iter().map(|l| weights[l.0]).sum()
    }
}

/// Sum of the link delays along `path`.
pub fn path_delay(path: &Path) -> u32 {
    path.delay_ms()
}

/// Carried load per link, in Mbps.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLoadMap {
    loads: Vec<f64>,
}

impl LinkLoadMap {
    pub fn zeros(net: &Network) -> Self {
        LinkLoadMap {
            loads: alloc::vec![0.0; net.link_count()],
        }
    }

    pub fn from_vec(net: &Network, loads: Vec<f64>) -> Result<Self> {
        if loads.len() != net.link_count() {
            return Err(Error::WeightCount {
                expected: net.link_count(),
                got: loads.len(),
            });
        }
        if let Some(&bad) = loads.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidLoad(bad));
        }
        Ok(LinkLoadMap { loads })
    }

    pub fn add(&mut self, link: LinkId, mbps: f64) -> Result<()> {
        if !(mbps.is_finite() && mbps >= 0.0) {
            return Err(Error::InvalidLoad(mbps));
        }
        self.loads[link.0] += mbps;
        Ok(())
    }

    pub fn get(&self, link: LinkId) -> f64 {
        self.loads[link.0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.loads
    }

    pub fn iter(&self) -> impl Iterator<Item = (LinkId, f64)> + '_ {
        self.loads.iter().enumerate().map(|(i, &v)| (LinkId(i), v))
    }

    pub fn merge(&mut self, other: &LinkLoadMap) {
        for (a, b) in self.loads.iter_mut().zip(&other.loads) {
            *a += *b;
        }
    }
}

/// Capacity minus load per link. Overloaded links come out negative.
pub fn residual(net: &Network, loads: &LinkLoadMap) -> Vec<f64> {
    net.links()
        .map(|(id, l)| l.capacity_mbps - loads.get(id))
        .collect()
}

pub(crate) fn check_weights(net: &Network, weights: &[f64]) -> Result<()> {
    if weights.len() != net.link_count() {
        return Err(Error::WeightCount {
            expected: net.link_count(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidWeight);
    }
    Ok(())
}

/// Minimum-weight simple path from `s` to `t`.
///
/// Among equal-weight paths the one whose node-id sequence is
/// lexicographically smallest wins. `Ok(None)` when `t` is unreachable.
pub fn shortest_path(net: &Network, weights: &[f64], s: NodeId, t: NodeId) -> Result<Option<Path>> {
    shortest_path_avoiding(net, weights, s, t, &[])
}

/// Like [`shortest_path`] but never visits any node in `avoid`.
pub fn shortest_path_avoiding(
    net: &Network,
    weights: &[f64],
    s: NodeId,
    t: NodeId,
    avoid: &[NodeId],
) -> Result<Option<Path>> {
    check_weights(net, weights)?;
    if s == t {
        return Err(Error::SameEndpoints);
    }
    if avoid.contains(&s) || avoid.contains(&t) {
        return Ok(None);
    }
    let tree = search::lex_dijkstra(
        net.node_count(),
        s.0,
        |v| v,
        |u, out| {
            for &lid in net.out_links(NodeId(u)) {
                let l = net.link(lid);
                if !avoid.contains(&l.dst) {
                    out.push((lid.0, l.dst.0, weights[lid.0]));
                }
            }
        },
    );
    match tree.arcs_to(t.0) {
        None => Ok(None),
        Some(arcs) => Path::new(net, arcs.into_iter().map(LinkId).collect()).map(Some),
    }
}

/// Per-link delays as weights.
pub fn delay_weights(net: &Network) -> Vec<f64> {
    net.links().map(|(_, l)| f64::from(l.delay_ms)).collect()
}
