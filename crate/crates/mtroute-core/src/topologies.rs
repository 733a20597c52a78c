//! Discovery of edge-disjoint logical topologies rooted at a source node.
//!
//! Each pass takes the next live arc leaving the layer-1 source copy of the
//! layered graph and, for every other node as destination, finds the
//! hop-shortest layered path that starts with that arc. The union of those
//! paths becomes one logical topology and all of its links are removed from
//! the layered graph before the next pass, so topologies never share a link.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{LinkId, Network, NodeId, Path};
use crate::layered::{build_layered, LayeredHop, LayeredNode};
use crate::search::{self, cmp_label};

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalTopology {
    index: usize,
    links: BTreeSet<LinkId>,
    paths: BTreeMap<NodeId, Path>,
}

impl LogicalTopology {
    pub fn new(index: usize) -> Self {
        LogicalTopology {
            index,
            links: BTreeSet::new(),
            paths: BTreeMap::new(),
        }
    }

    /// 1-based topology index `k`.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn links(&self) -> &BTreeSet<LinkId> {
        &self.links
    }

    pub fn contains_link(&self, link: LinkId) -> bool {
        self.links.contains(&link)
    }

    /// Stored path per destination.
    pub fn paths(&self) -> &BTreeMap<NodeId, Path> {
        &self.paths
    }

    pub fn path_to(&self, dest: NodeId) -> Option<&Path> {
        self.paths.get(&dest)
    }

    /// Stores `path` for its destination and adds its links.
    pub fn insert_path(&mut self, path: Path) {
        if let Some(dest) = path.destination() {
            self.links.extend(path.links().iter().copied());
            self.paths.insert(dest, path);
        }
    }
}

/// Runs the discovery from `source` over a layered graph with `horizon`
/// layers. Every stored path has delay `< horizon`.
pub fn discover_topologies(net: &Network, horizon: u32, source: NodeId) -> Result<Vec<LogicalTopology>> {
    if source.0 >= net.node_count() {
        return Err(Error::UnknownNode(alloc::format!("{source:?}")));
    }
    let mut g = build_layered(net, horizon)?;
    g.attach_super_source(source);
    let s1 = LayeredNode { node: source, layer: 1 };

    // Literal out-degree counter; the loop also stops once no arcs remain.
    let mut remaining = g.out_degree(s1);
    if remaining == 0 {
        return Err(Error::NoTopologies(source));
    }

    let mut topologies = Vec::new();
    while remaining != 0 && g.out_degree(s1) > 0 {
        let first = g.out_arcs(s1).next().expect("out-degree checked");
        let head = g.arc(first).head;
        let mut topology = LogicalTopology::new(topologies.len() + 1);

        let tree = search::lex_dijkstra(
            g.copy_count(),
            g.index_of(head),
            |i| g.copy_at(i),
            |u, out| {
                for a in g.out_arcs(g.copy_at(u)) {
                    let arc = g.arc(a);
                    if arc.head.node != source {
                        out.push((a, g.index_of(arc.head), 1.0));
                    }
                }
            },
        );

        for (dest, _) in net.nodes() {
            if dest == source {
                continue;
            }
            // Super-sink over every copy of `dest`: keep the best label.
            let mut best: Option<usize> = None;
            for layer in 1..=horizon {
                let idx = g.index_of(LayeredNode { node: dest, layer });
                if !tree.reached(idx) {
                    continue;
                }
                best = match best {
                    Some(b)
                        if cmp_label(tree.dist(b), tree.sequence(b), tree.dist(idx), tree.sequence(idx))
                            != Ordering::Greater =>
                    {
                        Some(b)
                    }
                    _ => Some(idx),
                };
            }
            let Some(end) = best else { continue };
            let mut hops = vec![LayeredHop::FromSuperSource(s1), LayeredHop::Arc(first)];
            hops.extend(tree.arcs_to(end).unwrap().into_iter().map(LayeredHop::Arc));
            hops.push(LayeredHop::ToSuperSink(g.copy_at(end)));
            let path = g.to_original_path(&hops)?;
            topology.insert_path(path);
        }

        for &link in topology.links() {
            g.remove_link(link);
        }
        topologies.push(topology);
        remaining -= 1;
    }
    Ok(topologies)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentationReport {
    /// `(link, topology index)` for every link that was added.
    pub added: Vec<(LinkId, usize)>,
    /// Links that ended up in no topology.
    pub unassigned: Vec<LinkId>,
}

/// Adds links that no topology uses to the topology holding their parent
/// link, that is, an in-topology link ending where the leftover link starts.
///
/// A link is only added when the topology's path to its tail extended by the
/// link stays simple and below `horizon`; the smallest qualifying topology
/// index wins. Newly reachable destinations get the extended path. Passes
/// repeat until no more links can be placed.
pub fn augment_leftover_links(
    mut topologies: Vec<LogicalTopology>,
    net: &Network,
    horizon: u32,
) -> (Vec<LogicalTopology>, AugmentationReport) {
    let used: BTreeSet<LinkId> = topologies.iter().flat_map(|t| t.links.iter().copied()).collect();
    let mut leftover: Vec<LinkId> = net.links().map(|(id, _)| id).filter(|id| !used.contains(id)).collect();
    let mut report = AugmentationReport::default();
    topologies.sort_by_key(|t| t.index);

    loop {
        let mut changed = false;
        let mut still = Vec::new();
        for link in leftover {
            let l = net.link(link);
            let mut placed = false;
            for top in topologies.iter_mut() {
                let has_parent = top.links.iter().any(|&p| net.link(p).dst == l.src);
                if !has_parent {
                    continue;
                }
                let Some(to_tail) = top.paths.get(&l.src) else {
                    continue;
                };
                if to_tail.contains_node(l.dst) || to_tail.delay_ms() + l.delay_ms >= horizon {
                    continue;
                }
                let mut links = to_tail.links().to_vec();
                links.push(link);
                let Ok(extended) = Path::new(net, links) else {
                    continue;
                };
                top.links.insert(link);
                top.paths.entry(l.dst).or_insert(extended);
                report.added.push((link, top.index));
                placed = true;
                changed = true;
                break;
            }
            if !placed {
                still.push(link);
            }
        }
        leftover = still;
        if !changed || leftover.is_empty() {
            break;
        }
    }
    report.unassigned = leftover;
    (topologies, report)
}

/// `true` when no two topologies share a link.
pub fn pairwise_disjoint(topologies: &[LogicalTopology]) -> bool {
    let mut seen = BTreeSet::new();
    topologies
        .iter()
        .flat_map(|t| t.links.iter())
        .all(|l| seen.insert(*l))
}
