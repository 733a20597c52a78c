//! Traffic demands, per-flow topology selection and link-load accumulation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::graph::{LinkId, LinkLoadMap, Network, NodeId, Path};
use crate::topologies::LogicalTopology;

/// Status text attached to demands for which no topology meets the bound.
pub const SLA_REJECTION: &str = "No feasible path is found to comply with SLA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrafficClass {
    Realtime,
    NonRealtime,
}

impl TrafficClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TrafficClass::Realtime => "realtime",
            TrafficClass::NonRealtime => "non_realtime",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "realtime" => Some(TrafficClass::Realtime),
            "non_realtime" => Some(TrafficClass::NonRealtime),
            _ => None,
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficDemand {
    pub id: usize,
    pub origin: NodeId,
    pub destination: NodeId,
    pub volume_mbps: f64,
    pub class: TrafficClass,
    pub delay_bound_ms: u32,
}

impl TrafficDemand {
    pub fn new(
        id: usize,
        origin: NodeId,
        destination: NodeId,
        volume_mbps: f64,
        class: TrafficClass,
        delay_bound_ms: u32,
    ) -> Result<Self> {
        if origin == destination {
            return Err(Error::InvalidDemand("origin equals destination"));
        }
        if !(volume_mbps.is_finite() && volume_mbps >= 0.0) {
            return Err(Error::InvalidDemand("volume must be finite and non-negative"));
        }
        if delay_bound_ms == 0 {
            return Err(Error::InvalidDemand("delay bound must be positive"));
        }
        Ok(TrafficDemand {
            id,
            origin,
            destination,
            volume_mbps,
            class,
            delay_bound_ms,
        })
    }

    /// `d(p) / D^tau` for a path of the given delay.
    pub fn delay_ratio(&self, path_delay_ms: u32) -> f64 {
        f64::from(path_delay_ms) / f64::from(self.delay_bound_ms)
    }
}

/// A topology whose path to the demand's destination meets the delay bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<'t> {
    pub topology: usize,
    pub path: &'t Path,
    pub gamma: f64,
}

/// Every topology holding a path from the demand's origin to its destination
/// with `d(p) / D^tau <= 1`.
pub fn feasible_topologies<'t>(topologies: &'t [LogicalTopology], demand: &TrafficDemand) -> Vec<Candidate<'t>> {
    topologies
        .iter()
        .filter_map(|top| {
            let path = top.path_to(demand.destination)?;
            if path.origin() != Some(demand.origin) || path.delay_ms() > demand.delay_bound_ms {
                return None;
            }
            Some(Candidate {
                topology: top.index(),
                path,
                gamma: demand.delay_ratio(path.delay_ms()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySelection {
    pub demand_id: usize,
    pub topology: usize,
    pub path: Path,
    /// `d(p) / D^tau`, in `(0, 1]`.
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlaRejection {
    pub demand_id: usize,
}

impl fmt::Display for SlaRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "demand {}: {}", self.demand_id, SLA_REJECTION)
    }
}

/// Picks the candidate with the largest delay ratio, smallest topology index
/// on ties. An empty candidate set is an SLA rejection.
pub fn select_topology(candidates: &[Candidate<'_>], demand: &TrafficDemand) -> core::result::Result<TopologySelection, SlaRejection> {
    // Same bound for every candidate, so comparing integer delays compares ratios.
    let best = candidates.iter().fold(None::<&Candidate<'_>>, |best, c| match best {
        None => Some(c),
        Some(b) => {
            let (bd, cd) = (b.path.delay_ms(), c.path.delay_ms());
            if cd > bd || (cd == bd && c.topology < b.topology) {
                Some(c)
            } else {
                Some(b)
            }
        }
    });
    match best {
        None => Err(SlaRejection { demand_id: demand.id }),
        Some(c) => Ok(TopologySelection {
            demand_id: demand.id,
            topology: c.topology,
            path: c.path.clone(),
            gamma: c.gamma,
        }),
    }
}

/// Total delay ratio over the selected paths.
pub fn slave_objective(selected: &[TopologySelection]) -> f64 {
    selected.iter().map(|s| s.gamma).sum()
}

/// A fraction of a demand carried on one path, optionally tagged with the
/// logical topology that supplied it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathShare {
    pub topology: Option<usize>,
    pub path: Path,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedDemand {
    pub demand: TrafficDemand,
    pub shares: Vec<PathShare>,
}

impl RoutedDemand {
    /// Link fractions `x^k(i, j)` keyed by `(topology, link)`.
    pub fn link_fractions(&self) -> BTreeMap<(Option<usize>, LinkId), f64> {
        let mut x = BTreeMap::new();
        for share in &self.shares {
            for &l in share.path.links() {
                *x.entry((share.topology, l)).or_insert(0.0) += share.fraction;
            }
        }
        x
    }

    /// Net outflow of routed fraction at every node.
    pub fn node_balance(&self, net: &Network) -> Vec<f64> {
        let mut bal = vec![0.0; net.node_count()];
        for share in &self.shares {
            for &l in share.path.links() {
                let link = net.link(l);
                bal[link.src.0] += share.fraction;
                bal[link.dst.0] -= share.fraction;
            }
        }
        bal
    }

    pub fn fraction_sum(&self) -> f64 {
        self.shares.iter().map(|s| s.fraction).sum()
    }
}

/// Routed demands and the link loads they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingAssignment {
    routed: Vec<RoutedDemand>,
    loads: LinkLoadMap,
}

impl RoutingAssignment {
    pub fn new(net: &Network) -> Self {
        RoutingAssignment {
            routed: Vec::new(),
            loads: LinkLoadMap::zeros(net),
        }
    }

    /// Adds a demand split over `shares`, whose fractions must sum to one.
    pub fn push(&mut self, demand: TrafficDemand, shares: Vec<PathShare>) -> Result<()> {
        for share in &shares {
            if share.path.origin() != Some(demand.origin) || share.path.destination() != Some(demand.destination) {
                return Err(Error::InvalidDemand("path endpoints do not match the demand"));
            }
            if !(0.0..=1.0).contains(&share.fraction) {
                return Err(Error::InvalidDemand("path fraction outside [0, 1]"));
            }
        }
        for share in &shares {
            for &l in share.path.links() {
                self.loads.add(l, share.fraction * demand.volume_mbps)?;
            }
        }
        self.routed.push(RoutedDemand { demand, shares });
        Ok(())
    }

    /// Adds a demand carried entirely on `path`.
    pub fn push_unsplit(&mut self, demand: TrafficDemand, topology: Option<usize>, path: Path) -> Result<()> {
        self.push(
            demand,
            vec![PathShare {
                topology,
                path,
                fraction: 1.0,
            }],
        )
    }

    pub fn routed(&self) -> &[RoutedDemand] {
        &self.routed
    }

    pub fn loads(&self) -> &LinkLoadMap {
        &self.loads
    }
}

/// Loads of unsplit routes: every demand contributes its full volume to
/// every link of its path.
pub fn accumulate<'a, I>(net: &Network, assignments: I) -> Result<RoutingAssignment>
where
    I: IntoIterator<Item = (&'a TrafficDemand, &'a Path)>,
{
    let mut out = RoutingAssignment::new(net);
    for (demand, path) in assignments {
        out.push_unsplit(demand.clone(), None, path.clone())?;
    }
    Ok(out)
}

/// First routing constraint found violated by [`verify_routing`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    Conservation { demand_id: usize, node: NodeId, balance: f64 },
    FractionSum { demand_id: usize, sum: f64 },
    FractionRange { demand_id: usize, link: LinkId, value: f64 },
    LoadMismatch { link: LinkId, recorded: f64, recomputed: f64 },
}

/// Re-checks flow conservation, unit fraction sums, fraction ranges and the
/// load identity `f(i,j) = sum x(i,j) r` for every routed demand.
pub fn verify_routing(net: &Network, assignment: &RoutingAssignment, tol: f64) -> core::result::Result<(), ConstraintViolation> {
    let mut recount = vec![0.0; net.link_count()];
    for rd in assignment.routed() {
        let d = &rd.demand;
        let sum = rd.fraction_sum();
        if (sum - 1.0).abs() > tol {
            return Err(ConstraintViolation::FractionSum { demand_id: d.id, sum });
        }
        for (node, &b) in rd.node_balance(net).iter().enumerate() {
            let node = NodeId(node);
            let want = if node == d.origin {
                1.0
            } else if node == d.destination {
                -1.0
            } else {
                0.0
            };
            if (b - want).abs() > tol {
                return Err(ConstraintViolation::Conservation {
                    demand_id: d.id,
                    node,
                    balance: b,
                });
            }
        }
        for ((_, link), x) in rd.link_fractions() {
            if !(-tol..=1.0 + tol).contains(&x) {
                return Err(ConstraintViolation::FractionRange {
                    demand_id: d.id,
                    link,
                    value: x,
                });
            }
            recount[link.0] += x * d.volume_mbps;
        }
    }
    for (link, recorded) in assignment.loads().iter() {
        let recomputed = recount[link.0];
        if (recorded - recomputed).abs() > tol * recorded.abs().max(1.0) {
            return Err(ConstraintViolation::LoadMismatch {
                link,
                recorded,
                recomputed,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeKind;

    fn line_net() -> Network {
        let mut b = Network::builder();
        b.node("a", NodeKind::Router)
            .node("b", NodeKind::Router)
            .node("c", NodeKind::Router)
            .node("d", NodeKind::Router)
            .link("a", "b", 40.0, 1)
            .link("b", "c", 40.0, 1)
            .link("c", "d", 40.0, 1)
            .link("a", "d", 40.0, 1);
        b.build().unwrap()
    }

    fn demand(id: usize, net: &Network, s: &str, t: &str, v: f64, bound: u32) -> TrafficDemand {
        TrafficDemand::new(
            id,
            net.node_id(s).unwrap(),
            net.node_id(t).unwrap(),
            v,
            TrafficClass::NonRealtime,
            bound,
        )
        .unwrap()
    }

    /// Topologies 1..=n with paths of the given delays from a to d, built over
    /// a chain network where link i has delay `delays[i]`.
    fn topologies_with_delays(delays: &[u32]) -> (Network, Vec<LogicalTopology>) {
        let mut b = Network::builder();
        b.node("s", NodeKind::Router).node("t", NodeKind::Router);
        for (i, _) in delays.iter().enumerate() {
            b.node(alloc::format!("m{i}"), NodeKind::Router);
        }
        for (i, &d) in delays.iter().enumerate() {
            let m = alloc::format!("m{i}");
            b.link("s", m.as_str(), 10.0, 1);
            b.link(m.as_str(), "t", 10.0, d - 1);
        }
        let net = b.build().unwrap();
        let s = net.node_id("s").unwrap();
        let t = net.node_id("t").unwrap();
        let tops = delays
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let m = net.node_id(&alloc::format!("m{i}")).unwrap();
                let mut top = LogicalTopology::new(i + 1);
                top.insert_path(Path::from_nodes(&net, &[s, m, t]).unwrap());
                top
            })
            .collect();
        (net, tops)
    }

    #[test]
    fn demand_validation() {
        let net = line_net();
        let a = net.node_id("a").unwrap();
        let b = net.node_id("b").unwrap();
        assert!(TrafficDemand::new(0, a, a, 1.0, TrafficClass::Realtime, 4).is_err());
        assert!(TrafficDemand::new(0, a, b, f64::NAN, TrafficClass::Realtime, 4).is_err());
        assert!(TrafficDemand::new(0, a, b, 1.0, TrafficClass::Realtime, 0).is_err());
    }

    #[test]
    fn feasible_filters_by_ratio() {
        let (net, tops) = topologies_with_delays(&[2, 5, 9]);
        let d = demand(0, &net, "s", "t", 1.0, 5);
        let c = feasible_topologies(&tops, &d);
        let ks: Vec<usize> = c.iter().map(|c| c.topology).collect();
        assert_eq!(ks, [1, 2]);
        assert_eq!(c[1].gamma, 1.0);
        let none = demand(1, &net, "s", "m0", 1.0, 5);
        assert!(feasible_topologies(&tops, &none).is_empty());
    }

    #[test]
    fn selects_longest_acceptable() {
        let (net, tops) = topologies_with_delays(&[4, 9]);
        let d = demand(0, &net, "s", "t", 1.0, 10);
        let c = feasible_topologies(&tops, &d);
        assert_eq!(c.iter().map(|c| c.gamma).collect::<Vec<_>>(), [0.4, 0.9]);
        let sel = select_topology(&c, &d).unwrap();
        assert_eq!(sel.topology, 2);
        assert_eq!(sel.gamma, 0.9);

        let (net, tops) = topologies_with_delays(&[3]);
        let d = demand(1, &net, "s", "t", 1.0, 10);
        let sel = select_topology(&feasible_topologies(&tops, &d), &d).unwrap();
        assert_eq!((sel.topology, sel.gamma), (1, 0.3));

        let rej = select_topology(&[], &d).unwrap_err();
        assert_eq!(rej, SlaRejection { demand_id: 1 });
        assert!(alloc::string::ToString::to_string(&rej).contains(SLA_REJECTION));
    }

    #[test]
    fn equal_ratios_pick_smallest_index() {
        let (net, tops) = topologies_with_delays(&[6, 6, 3]);
        let d = demand(0, &net, "s", "t", 1.0, 8);
        let sel = select_topology(&feasible_topologies(&tops, &d), &d).unwrap();
        assert_eq!(sel.topology, 1);
    }

    #[test]
    fn slave_objective_sums_gammas() {
        let mk = |g| TopologySelection {
            demand_id: 0,
            topology: 1,
            path: Path::empty(),
            gamma: g,
        };
        assert!((slave_objective(&[mk(0.9), mk(0.5)]) - 1.4).abs() < 1e-15);
        assert_eq!(slave_objective(&[]), 0.0);
        assert_eq!(slave_objective(&[mk(1.0)]), 1.0);
    }

    #[test]
    fn accumulate_sums_shared_links() {
        let net = line_net();
        let ids: Vec<NodeId> = ["a", "b", "c", "d"].iter().map(|n| net.node_id(n).unwrap()).collect();
        let p1 = Path::from_nodes(&net, &ids[..3]).unwrap();
        let p2 = Path::from_nodes(&net, &ids[1..]).unwrap();
        let p3 = Path::from_nodes(&net, &[ids[0], ids[3]]).unwrap();
        let d1 = demand(0, &net, "a", "c", 5.0, 9);
        let d2 = demand(1, &net, "b", "d", 7.0, 9);
        let d3 = demand(2, &net, "a", "d", 3.0, 9);
        let r = accumulate(&net, [(&d1, &p1), (&d2, &p2), (&d3, &p3)]).unwrap();
        let bc = net.link_between(ids[1], ids[2]).unwrap();
        let ad = net.link_between(ids[0], ids[3]).unwrap();
        let ab = net.link_between(ids[0], ids[1]).unwrap();
        assert_eq!(r.loads().get(bc), 12.0);
        assert_eq!(r.loads().get(ad), 3.0);
        assert_eq!(r.loads().get(ab), 5.0);
        assert_eq!(verify_routing(&net, &r, 1e-12), Ok(()));
    }

    #[test]
    fn push_rejects_mismatched_path() {
        let net = line_net();
        let ids: Vec<NodeId> = ["a", "b", "c"].iter().map(|n| net.node_id(n).unwrap()).collect();
        let p = Path::from_nodes(&net, &ids[..2]).unwrap();
        let d = demand(0, &net, "a", "c", 1.0, 5);
        assert!(RoutingAssignment::new(&net).push_unsplit(d, None, p).is_err());
    }

    #[test]
    fn verify_detects_fraction_deficit() {
        let net = line_net();
        let ids: Vec<NodeId> = ["a", "d"].iter().map(|n| net.node_id(n).unwrap()).collect();
        let p = Path::from_nodes(&net, &ids).unwrap();
        let d = demand(0, &net, "a", "d", 1.0, 5);
        let mut r = RoutingAssignment::new(&net);
        r.push(
            d,
            vec![PathShare {
                topology: None,
                path: p,
                fraction: 0.5,
            }],
        )
        .unwrap();
        assert!(matches!(
            verify_routing(&net, &r, 1e-9),
            Err(ConstraintViolation::FractionSum { .. })
        ));
    }
}
