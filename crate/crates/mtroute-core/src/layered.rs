//! Time-expanded copy of a network.
//!
//! Every node `u` is copied into layers `1..=D`. Link `(i, j)` with delay `d`
//! becomes one arc `(i_k, j_{k+d})` for every `k` with `k + d <= D`, so a walk
//! that starts at layer 1 and ends at layer `l` has total delay `l - 1 < D`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{LinkId, Network, NodeId, Path};

/// Copy of `node` at time `layer` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayeredNode {
    pub node: NodeId,
    pub layer: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayeredArc {
    pub tail: LayeredNode,
    pub head: LayeredNode,
    /// Original link this arc was expanded from.
    pub link: LinkId,
    pub capacity_mbps: f64,
}

/// One step of a path through the layered graph, including the unbounded
/// attachment arcs of the super-source and super-sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayeredHop {
    /// Super-source `S` into the given copy.
    FromSuperSource(LayeredNode),
    /// A real arc, by index into [`LayeredGraph::arcs`].
    Arc(usize),
    /// The given copy into the super-sink.
    ToSuperSink(LayeredNode),
}

#[derive(Debug, Clone)]
pub struct LayeredGraph<'a> {
    net: &'a Network,
    horizon: u32,
    arcs: Vec<LayeredArc>,
    out: Vec<Vec<usize>>,
    link_arcs: Vec<Vec<usize>>,
    removed: Vec<bool>,
    super_source: Option<NodeId>,
    super_sink: Option<NodeId>,
}

/// Expands `net` over `horizon` layers.
pub fn build_layered(net: &Network, horizon: u32) -> Result<LayeredGraph<'_>> {
    if horizon < 1 {
        return Err(Error::InvalidHorizon(horizon));
    }
    let copies = net.node_count() * horizon as usize;
    let mut arcs = Vec::new();
    let mut out = vec![Vec::new(); copies];
    let mut link_arcs = vec![Vec::new(); net.link_count()];
    for (id, link) in net.links() {
        if link.delay_ms == 0 {
            return Err(Error::InvalidDelay {
                src: net.name(link.src).into(),
                dst: net.name(link.dst).into(),
            });
        }
        let mut k = 1u32;
        while k.saturating_add(link.delay_ms) <= horizon {
            let tail = LayeredNode { node: link.src, layer: k };
            let head = LayeredNode {
                node: link.dst,
                layer: k + link.delay_ms,
            };
            let idx = arcs.len();
            arcs.push(LayeredArc {
                tail,
                head,
                link: id,
                capacity_mbps: link.capacity_mbps,
            });
            link_arcs[id.0].push(idx);
            k += 1;
        }
    }
    for (idx, arc) in arcs.iter().enumerate() {
        let t = copy_index(horizon, arc.tail);
        out[t].push(idx);
    }
    // Deterministic arc order out of every copy: by head copy.
    for list in &mut out {
        list.sort_by_key(|&a| arcs[a].head);
    }
    Ok(LayeredGraph {
        net,
        horizon,
        arcs,
        out,
        link_arcs,
        removed: vec![false; net.link_count()],
        super_source: None,
        super_sink: None,
    })
}

fn copy_index(horizon: u32, n: LayeredNode) -> usize {
    n.node.0 * horizon as usize + (n.layer as usize - 1)
}

impl<'a> LayeredGraph<'a> {
    pub fn network(&self) -> &'a Network {
        self.net
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Number of copy nodes, excluding the super-source and super-sink.
    pub fn copy_count(&self) -> usize {
        self.net.node_count() * self.horizon as usize
    }

    pub fn copy_at(&self, idx: usize) -> LayeredNode {
        let h = self.horizon as usize;
        LayeredNode {
            node: NodeId(idx / h),
            layer: (idx % h) as u32 + 1,
        }
    }

    pub fn index_of(&self, n: LayeredNode) -> usize {
        copy_index(self.horizon, n)
    }

    /// All arcs ever built, including ones whose link was since removed.
    pub fn arcs(&self) -> &[LayeredArc] {
        &self.arcs
    }

    pub fn arc(&self, idx: usize) -> &LayeredArc {
        &self.arcs[idx]
    }

    pub fn is_live(&self, arc: usize) -> bool {
        !self.removed[self.arcs[arc].link.0]
    }

    pub fn live_arc_count(&self) -> usize {
        (0..self.arcs.len()).filter(|&a| self.is_live(a)).count()
    }

    /// Live arcs leaving `copy`, ordered by head copy.
    pub fn out_arcs(&self, copy: LayeredNode) -> impl Iterator<Item = usize> + '_ {
        self.out[self.index_of(copy)]
            .iter()
            .copied()
            .filter(move |&a| self.is_live(a))
    }

    pub fn out_degree(&self, copy: LayeredNode) -> usize {
        self.out_arcs(copy).count()
    }

    /// Removes every copy of `link`.
    pub fn remove_link(&mut self, link: LinkId) {
        self.removed[link.0] = true;
    }

    pub fn is_removed(&self, link: LinkId) -> bool {
        self.removed[link.0]
    }

    /// Arc indices expanded from `link`.
    pub fn arcs_of(&self, link: LinkId) -> &[usize] {
        &self.link_arcs[link.0]
    }

    /// Attaches the super-source `S` to the layer-1 copy of `source`.
    pub fn attach_super_source(&mut self, source: NodeId) {
        self.super_source = Some(source);
    }

    /// Attaches every copy of `dest` to the super-sink.
    pub fn attach_super_sink(&mut self, dest: NodeId) {
        self.super_sink = Some(dest);
    }

    /// Attachment arcs as `(hop, capacity)`; the capacity is always infinite.
    pub fn super_arcs(&self) -> Vec<(LayeredHop, f64)> {
        let mut v = Vec::new();
        if let Some(s) = self.super_source {
            v.push((LayeredHop::FromSuperSource(LayeredNode { node: s, layer: 1 }), f64::INFINITY));
        }
        if let Some(t) = self.super_sink {
            for layer in 1..=self.horizon {
                v.push((LayeredHop::ToSuperSink(LayeredNode { node: t, layer }), f64::INFINITY));
            }
        }
        v
    }

    /// Maps a layered path onto the original links it traverses and their
    /// total delay, without requiring the result to be a simple path.
    ///
    /// Attachment hops may only appear at the ends. The first real arc must
    /// leave a layer-1 copy; the returned delay is the final layer minus one.
    pub fn to_original_walk(&self, hops: &[LayeredHop]) -> Result<(Vec<LinkId>, u32)> {
        let mut start = 0;
        let mut end = hops.len();
        let mut entry = None;
        let mut exit = None;
        if let Some(LayeredHop::FromSuperSource(n)) = hops.first() {
            entry = Some(*n);
            start = 1;
        }
        if end > start {
            if let Some(LayeredHop::ToSuperSink(n)) = hops.last() {
                exit = Some(*n);
                end -= 1;
            }
        }
        let mut links = Vec::with_capacity(end - start);
        let mut at: Option<LayeredNode> = entry;
        for hop in &hops[start..end] {
            let LayeredHop::Arc(idx) = *hop else {
                return Err(Error::LayeredPath("attachment arc in the middle of a path"));
            };
            let arc = self.arcs.get(idx).ok_or(Error::LayeredPath("unknown arc index"))?;
            match at {
                None if arc.tail.layer != 1 => {
                    return Err(Error::LayeredPath("path does not start at layer 1"));
                }
                Some(prev) if prev != arc.tail => {
                    return Err(Error::LayeredPath("consecutive arcs are not adjacent"));
                }
                _ => {}
            }
            links.push(arc.link);
            at = Some(arc.head);
        }
        if let (Some(e), true) = (entry, links.is_empty()) {
            if e.layer != 1 {
                return Err(Error::LayeredPath("path does not start at layer 1"));
            }
        }
        if let (Some(x), Some(a)) = (exit, at) {
            if x != a {
                return Err(Error::LayeredPath("super-sink attached to a different copy"));
            }
        }
        let delay = at.map_or(0, |n| n.layer - 1);
        Ok((links, delay))
    }

    /// Maps a layered path onto the corresponding simple path of the network.
    pub fn to_original_path(&self, hops: &[LayeredHop]) -> Result<Path> {
        let (links, delay) = self.to_original_walk(hops)?;
        let path = Path::new(self.net, links)?;
        debug_assert_eq!(path.delay_ms(), delay);
        Ok(path)
    }
}
