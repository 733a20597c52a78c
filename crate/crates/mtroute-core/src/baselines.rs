//! Routing schemes compared in experiments: weighted shortest path (DMetric
//! and InvCap weights), the anchor-aware longest-acceptable-path scheme, and
//! the LP optimum of the max-min residual capacity problem.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::flow::{
    feasible_topologies, select_topology, PathShare, SLA_REJECTION, RoutingAssignment, SlaRejection, TopologySelection, TrafficClass,
    TrafficDemand,
};
use crate::graph::{
    check_weights, delay_weights, shortest_path, shortest_path_avoiding, LinkId, LinkLoadMap, Network, NodeId, NodeKind,
    Path,
};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::topologies::{augment_leftover_links, discover_topologies, LogicalTopology};

pub const DMETRIC_BASE: f64 = 1.0;
pub const DMETRIC_ENB_ENB: f64 = 10.0;
pub const DMETRIC_RELAY_RELAY: f64 = 100.0;

/// IGP default metrics: eNB-eNB links cost 10, relay-relay links 100, every
/// other link 1.
pub fn weights_dmetric(net: &Network) -> Vec<f64> {
    net.links()
        .map(|(_, l)| match (net.node(l.src).kind, net.node(l.dst).kind) {
            (NodeKind::Enb, NodeKind::Enb) => DMETRIC_BASE * DMETRIC_ENB_ENB,
            (NodeKind::Relay, NodeKind::Relay) => DMETRIC_BASE * DMETRIC_RELAY_RELAY,
            _ => DMETRIC_BASE,
        })
        .collect()
}

/// `max_capacity / capacity` per link, so the fattest links weigh 1.
pub fn weights_invcap(net: &Network) -> Vec<f64> {
    let w0 = net.max_capacity();
    net.links().map(|(_, l)| w0 / l.capacity_mbps).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathRouting {
    pub assignment: RoutingAssignment,
    /// Ids of demands with no path; they carry no load.
    pub unreachable: Vec<usize>,
}

/// Routes every demand unsplit on its weighted shortest path.
pub fn route_shortest(net: &Network, weights: &[f64], demands: &[TrafficDemand]) -> Result<ShortestPathRouting> {
    check_weights(net, weights)?;
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidWeight);
    }
    let mut cache: BTreeMap<(NodeId, NodeId), Option<Path>> = BTreeMap::new();
    let mut assignment = RoutingAssignment::new(net);
    let mut unreachable = Vec::new();
    for d in demands {
        let key = (d.origin, d.destination);
        if !cache.contains_key(&key) {
            cache.insert(key, shortest_path(net, weights, d.origin, d.destination)?);
        }
        match &cache[&key] {
            Some(p) => assignment.push_unsplit(d.clone(), None, p.clone())?,
            None => unreachable.push(d.id),
        }
    }
    Ok(ShortestPathRouting { assignment, unreachable })
}

/// Total delay then node sequence, the order used for every delay tie.
fn cmp_delay_lex(a: &Path, b: &Path) -> Ordering {
    a.delay_ms().cmp(&b.delay_ms()).then_with(|| a.nodes().cmp(b.nodes()))
}

/// Shortest-delay simple path from `s` to `t` that visits `anchor`.
///
/// Tries the concatenation of the two shortest segments first. If that
/// repeats a node, enumerates every simple `s -> anchor` segment and pairs it
/// with the shortest `anchor -> t` segment avoiding it.
pub fn anchor_path(net: &Network, s: NodeId, t: NodeId, anchor: NodeId) -> Result<Option<Path>> {
    let w = delay_weights(net);
    if s == anchor || t == anchor {
        return shortest_path(net, &w, s, t);
    }
    let (Some(first), Some(second)) = (shortest_path(net, &w, s, anchor)?, shortest_path(net, &w, anchor, t)?) else {
        return Ok(None);
    };
    if let Ok(p) = first.concat(net, &second) {
        return Ok(Some(p));
    }
    let mut best: Option<Path> = None;
    for seg in simple_paths(net, s, anchor) {
        let avoid: Vec<NodeId> = seg.nodes().iter().copied().filter(|&n| n != anchor).collect();
        if let Some(rest) = shortest_path_avoiding(net, &w, anchor, t, &avoid)? {
            let cand = seg.concat(net, &rest)?;
            if best.as_ref().is_none_or(|b| cmp_delay_lex(&cand, b) == Ordering::Less) {
                best = Some(cand);
            }
        }
    }
    Ok(best)
}

/// Every simple path from `s` to `t`, depth first in link order.
pub fn simple_paths(net: &Network, s: NodeId, t: NodeId) -> Vec<Path> {
    fn walk(net: &Network, t: NodeId, stack: &mut Vec<LinkId>, on: &mut Vec<bool>, at: NodeId, out: &mut Vec<Path>) {
        if at == t {
            out.push(Path::new(net, stack.clone()).expect("walk keeps paths simple"));
            return;
        }
        for &l in net.out_links(at) {
            let next = net.link(l).dst;
            if on[next.0] {
                continue;
            }
            on[next.0] = true;
            stack.push(l);
            walk(net, t, stack, on, next, out);
            stack.pop();
            on[next.0] = false;
        }
    }
    let mut out = Vec::new();
    if s == t {
        return out;
    }
    let mut on = vec![false; net.node_count()];
    on[s.0] = true;
    walk(net, t, &mut Vec::new(), &mut on, s, &mut out);
    out
}

/// Discovered and augmented topologies per source node.
pub type TopologyIndex = BTreeMap<NodeId, Vec<LogicalTopology>>;

/// Runs discovery plus leftover-link augmentation from every node in
/// `sources`. Sources without outgoing links map to an empty list.
pub fn discover_for_sources(net: &Network, horizon: u32, sources: impl IntoIterator<Item = NodeId>) -> Result<TopologyIndex> {
    let mut index = BTreeMap::new();
    for s in sources {
        if index.contains_key(&s) {
            continue;
        }
        let tops = match discover_topologies(net, horizon, s) {
            Ok(t) => augment_leftover_links(t, net, horizon).0,
            Err(Error::NoTopologies(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        index.insert(s, tops);
    }
    Ok(index)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionOutcome {
    /// Non-realtime demand placed on a logical topology.
    Selected(TopologySelection),
    /// Realtime demand routed through the central anchor.
    Anchored { path: Path, gamma: f64 },
    Rejected(SlaRejection),
    /// No path through the anchor exists.
    Unreachable,
}

impl SelectionOutcome {
    pub fn status(&self) -> &'static str {
        match self {
            SelectionOutcome::Selected(_) => "selected",
            SelectionOutcome::Anchored { gamma, .. } if *gamma > 1.0 => "anchored_over_bound",
            SelectionOutcome::Anchored { .. } => "anchored",
            SelectionOutcome::Rejected(_) => SLA_REJECTION,
            SelectionOutcome::Unreachable => "unreachable",
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            SelectionOutcome::Selected(s) => Some(&s.path),
            SelectionOutcome::Anchored { path, .. } => Some(path),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRecord {
    pub demand: TrafficDemand,
    pub outcome: SelectionOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MDelayRouting {
    pub assignment: RoutingAssignment,
    pub trace: Vec<SelectionRecord>,
}

/// Realtime demands go through `anchor` on the shortest-delay path; the
/// others take the longest acceptable path among the topologies discovered
/// from their origin. Rejected and unreachable demands carry no load.
pub fn route_mdelay(
    net: &Network,
    topologies: &TopologyIndex,
    demands: &[TrafficDemand],
    anchor: NodeId,
) -> Result<MDelayRouting> {
    let mut anchor_cache: BTreeMap<(NodeId, NodeId), Option<Path>> = BTreeMap::new();
    let mut assignment = RoutingAssignment::new(net);
    let mut trace = Vec::with_capacity(demands.len());
    let empty: Vec<LogicalTopology> = Vec::new();
    for d in demands {
        let outcome = match d.class {
            TrafficClass::Realtime => {
                let key = (d.origin, d.destination);
                if !anchor_cache.contains_key(&key) {
                    anchor_cache.insert(key, anchor_path(net, d.origin, d.destination, anchor)?);
                }
                match &anchor_cache[&key] {
                    Some(p) => SelectionOutcome::Anchored {
                        path: p.clone(),
                        gamma: d.delay_ratio(p.delay_ms()),
                    },
                    None => SelectionOutcome::Unreachable,
                }
            }
            TrafficClass::NonRealtime => {
                let tops = topologies.get(&d.origin).unwrap_or(&empty);
                let candidates = feasible_topologies(tops, d);
                match select_topology(&candidates, d) {
                    Ok(sel) => SelectionOutcome::Selected(sel),
                    Err(rej) => SelectionOutcome::Rejected(rej),
                }
            }
        };
        match &outcome {
            SelectionOutcome::Selected(sel) => {
                assignment.push_unsplit(d.clone(), Some(sel.topology), sel.path.clone())?;
            }
            SelectionOutcome::Anchored { path, .. } => assignment.push_unsplit(d.clone(), None, path.clone())?,
            _ => {}
        }
        trace.push(SelectionRecord {
            demand: d.clone(),
            outcome,
        });
    }
    Ok(MDelayRouting { assignment, trace })
}

/// What the LP's scalar `z` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `max min (C - f)` in Mbps.
    AbsoluteResidual,
    /// `max min (C - f) / C`, the minimum residual capacity ratio.
    ResidualRatio,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::AbsoluteResidual => "absolute_residual",
            Objective::ResidualRatio => "residual_ratio",
        }
    }

    fn scale(self, capacity: f64) -> f64 {
        match self {
            Objective::AbsoluteResidual => 1.0,
            Objective::ResidualRatio => capacity,
        }
    }
}

/// Traffic of one origin-destination pair in the LP.
#[derive(Debug, Clone, PartialEq)]
pub struct CommodityFlow {
    pub origin: NodeId,
    pub destination: NodeId,
    pub volume_mbps: f64,
    /// Cycle-free fraction of the commodity on each link.
    pub link_fractions: Vec<f64>,
    /// Path decomposition of `link_fractions`; fractions sum to one.
    pub paths: Vec<(Path, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub objective: Objective,
    /// Optimal value of `z`: Mbps for the absolute objective, a ratio otherwise.
    pub z_star: f64,
    pub commodities: Vec<CommodityFlow>,
    pub loads: LinkLoadMap,
    pub iterations: usize,
}

impl OptimalSolution {
    /// `false` when even the best routing overloads some link.
    pub fn capacity_feasible(&self) -> bool {
        self.z_star >= -1e-9
    }

    /// Splits every demand like its commodity.
    pub fn to_assignment(&self, net: &Network, demands: &[TrafficDemand]) -> Result<RoutingAssignment> {
        let by_pair: BTreeMap<(NodeId, NodeId), &CommodityFlow> =
            self.commodities.iter().map(|c| ((c.origin, c.destination), c)).collect();
        let mut out = RoutingAssignment::new(net);
        for d in demands {
            let c = by_pair
                .get(&(d.origin, d.destination))
                .ok_or(Error::Solver("demand has no commodity"))?;
            let shares = c
                .paths
                .iter()
                .map(|(p, f)| PathShare {
                    topology: None,
                    path: p.clone(),
                    fraction: *f,
                })
                .collect();
            out.push(d.clone(), shares)?;
        }
        Ok(out)
    }
}

/// Max-min absolute residual capacity with splittable flows.
pub fn solve_optimal(net: &Network, demands: &[TrafficDemand]) -> Result<OptimalSolution> {
    solve_optimal_with(net, demands, Objective::AbsoluteResidual)
}

/// Exact LP: per-commodity link fractions, flow conservation, and
/// `f(i,j) + z * s(i,j) <= C(i,j)` with `s = 1` or `s = C` depending on the
/// objective; maximize `z`. Delay bounds are not enforced.
pub fn solve_optimal_with(net: &Network, demands: &[TrafficDemand], objective: Objective) -> Result<OptimalSolution> {
    if net.link_count() == 0 {
        return Err(Error::Solver("network has no links"));
    }
    let mut volumes: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for d in demands {
        *volumes.entry((d.origin, d.destination)).or_insert(0.0) += d.volume_mbps;
    }
    let pairs: Vec<((NodeId, NodeId), f64)> = volumes.into_iter().collect();
    let delay_w = delay_weights(net);

    // Commodities without volume still get a route so every demand has a path.
    let mut active = Vec::new();
    let mut idle = Vec::new();
    for (i, &((s, t), v)) in pairs.iter().enumerate() {
        if shortest_path(net, &delay_w, s, t)?.is_none() {
            return Err(Error::Solver("commodity has no path"));
        }
        if v > 0.0 {
            active.push(i);
        } else {
            idle.push(i);
        }
    }

    // Links entering the origin or leaving the destination only carry cycles.
    let mut var_of: Vec<Vec<Option<usize>>> = Vec::with_capacity(active.len());
    let mut n_vars = 0;
    for &ci in &active {
        let ((s, t), _) = pairs[ci];
        let vars = net
            .links()
            .map(|(_, l)| {
                if l.dst == s || l.src == t {
                    None
                } else {
                    n_vars += 1;
                    Some(n_vars - 1)
                }
            })
            .collect();
        var_of.push(vars);
    }
    let z_pos = n_vars;
    let z_neg = n_vars + 1;
    let mut lp = LinearProgram::new(n_vars + 2);
    lp.set_objective(z_pos, 1.0);
    lp.set_objective(z_neg, -1.0);

    for (k, &ci) in active.iter().enumerate() {
        let ((s, t), _) = pairs[ci];
        for (node, _) in net.nodes() {
            if node == t {
                continue;
            }
            let mut terms = Vec::new();
            for &l in net.out_links(node) {
                if let Some(v) = var_of[k][l.0] {
                    terms.push((v, 1.0));
                }
            }
            for &l in net.in_links(node) {
                if let Some(v) = var_of[k][l.0] {
                    terms.push((v, -1.0));
                }
            }
            let rhs = if node == s { 1.0 } else { 0.0 };
            if terms.is_empty() && rhs == 0.0 {
                continue;
            }
            lp.add_row(terms, Relation::Eq, rhs);
        }
    }
    for (id, l) in net.links() {
        let mut terms = Vec::new();
        for (k, &ci) in active.iter().enumerate() {
            if let Some(v) = var_of[k][id.0] {
                terms.push((v, pairs[ci].1));
            }
        }
        let sc = objective.scale(l.capacity_mbps);
        terms.push((z_pos, sc));
        terms.push((z_neg, -sc));
        lp.add_row(terms, Relation::Le, l.capacity_mbps);
    }

    let sol = lp.solve().map_err(|e| match e {
        LpError::Infeasible => Error::Solver("LP infeasible"),
        LpError::Unbounded => Error::Solver("LP unbounded"),
        LpError::IterationLimit => Error::Solver("LP iteration limit"),
        LpError::NonFinite => Error::Solver("LP has non-finite coefficients"),
    })?;
    let z_star = sol.x[z_pos] - sol.x[z_neg];

    let mut commodities = Vec::with_capacity(pairs.len());
    let mut loads = LinkLoadMap::zeros(net);
    let mut active_pos = 0;
    for (ci, &((s, t), v)) in pairs.iter().enumerate() {
        let paths = if idle.contains(&ci) {
            vec![(shortest_path(net, &delay_w, s, t)?.expect("checked above"), 1.0)]
        } else {
            let raw: Vec<f64> = var_of[active_pos].iter().map(|v| v.map_or(0.0, |i| sol.x[i])).collect();
            active_pos += 1;
            decompose(net, s, t, raw)?
        };
        let mut fractions = vec![0.0; net.link_count()];
        for (p, f) in &paths {
            for &l in p.links() {
                fractions[l.0] += f;
                loads.add(l, f * v)?;
            }
        }
        commodities.push(CommodityFlow {
            origin: s,
            destination: t,
            volume_mbps: v,
            link_fractions: fractions,
            paths,
        });
    }

    Ok(OptimalSolution {
        objective,
        z_star,
        commodities,
        loads,
        iterations: sol.iterations,
    })
}

/// Splits a unit `s -> t` link flow into simple paths, dropping cycles, and
/// rescales the path fractions to sum to exactly one.
fn decompose(net: &Network, s: NodeId, t: NodeId, mut flow: Vec<f64>) -> Result<Vec<(Path, f64)>> {
    const EPS: f64 = 1e-10;
    let mut paths: Vec<(Path, f64)> = Vec::new();
    let mut carried = 0.0;
    while carried < 1.0 - 1e-9 {
        // Depth-first search over positive-flow links, widest link first.
        let mut on = vec![false; net.node_count()];
        let mut stack: Vec<LinkId> = Vec::new();
        on[s.0] = true;
        if !dfs_flow(net, t, &flow, EPS, s, &mut on, &mut stack) {
            break;
        }
        let amount = stack.iter().map(|l| flow[l.0]).fold(f64::INFINITY, f64::min);
        for l in &stack {
            flow[l.0] -= amount;
        }
        let path = Path::new(net, stack)?;
        match paths.iter_mut().find(|(p, _)| *p == path) {
            Some(entry) => entry.1 += amount,
            None => paths.push((path, amount)),
        }
        carried += amount;
    }
    if paths.is_empty() || (carried - 1.0).abs() > 1e-6 {
        return Err(Error::Solver("LP flow does not decompose into unit s-t paths"));
    }
    for p in &mut paths {
        p.1 /= carried;
    }
    paths.sort_by(|a, b| cmp_delay_lex(&a.0, &b.0));
    Ok(paths)
}

fn dfs_flow(net: &Network, t: NodeId, flow: &[f64], eps: f64, at: NodeId, on: &mut [bool], stack: &mut Vec<LinkId>) -> bool {
    if at == t {
        return true;
    }
    let mut out: Vec<LinkId> = net.out_links(at).iter().copied().filter(|l| flow[l.0] > eps).collect();
    out.sort_by(|a, b| flow[b.0].partial_cmp(&flow[a.0]).unwrap_or(Ordering::Equal).then(a.cmp(b)));
    for l in out {
        let next = net.link(l).dst;
        if on[next.0] {
            continue;
        }
        on[next.0] = true;
        stack.push(l);
        if dfs_flow(net, t, flow, eps, next, on, stack) {
            return true;
        }
        stack.pop();
    }
    false
}

/// First violated LP constraint found by [`verify_optimal`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpViolation {
    Conservation { commodity: usize, node: NodeId, balance: f64 },
    FractionRange { commodity: usize, link: LinkId, value: f64 },
    PathSum { commodity: usize, sum: f64 },
    LoadIdentity { link: LinkId, recorded: f64, recomputed: f64 },
    Capacity { link: LinkId, load: f64, z_term: f64, capacity: f64 },
}

/// Re-checks every LP constraint on the reported solution, independently of
/// the solver's tableau.
pub fn verify_optimal(net: &Network, sol: &OptimalSolution, tol: f64) -> core::result::Result<(), LpViolation> {
    let mut recount = vec![0.0; net.link_count()];
    for (ci, c) in sol.commodities.iter().enumerate() {
        let sum: f64 = c.paths.iter().map(|p| p.1).sum();
        if (sum - 1.0).abs() > tol {
            return Err(LpViolation::PathSum { commodity: ci, sum });
        }
        let mut balance = vec![0.0; net.node_count()];
        for (id, l) in net.links() {
            let x = c.link_fractions[id.0];
            if !(-tol..=1.0 + tol).contains(&x) {
                return Err(LpViolation::FractionRange {
                    commodity: ci,
                    link: id,
                    value: x,
                });
            }
            balance[l.src.0] += x;
            balance[l.dst.0] -= x;
            recount[id.0] += x * c.volume_mbps;
        }
        for (node, &b) in balance.iter().enumerate() {
            let node = NodeId(node);
            let want = if node == c.origin {
                1.0
            } else if node == c.destination {
                -1.0
            } else {
                0.0
            };
            if (b - want).abs() > tol {
                return Err(LpViolation::Conservation {
                    commodity: ci,
                    node,
                    balance: b,
                });
            }
        }
    }
    for (id, l) in net.links() {
        let recorded = sol.loads.get(id);
        if (recorded - recount[id.0]).abs() > tol * recorded.max(1.0) {
            return Err(LpViolation::LoadIdentity {
                link: id,
                recorded,
                recomputed: recount[id.0],
            });
        }
        let z_term = sol.z_star * sol.objective.scale(l.capacity_mbps);
        let over_capacity = sol.capacity_feasible() && recorded > l.capacity_mbps + tol * l.capacity_mbps.max(1.0);
        if recorded + z_term > l.capacity_mbps + tol * l.capacity_mbps.max(1.0) || over_capacity {
            return Err(LpViolation::Capacity {
                link: id,
                load: recorded,
                z_term,
                capacity: l.capacity_mbps,
            });
        }
    }
    Ok(())
}

/// `min over links of (C - f) / s` for the objective's scale `s`.
pub fn achieved_z(net: &Network, loads: &LinkLoadMap, objective: Objective) -> f64 {
    net.links()
        .map(|(id, l)| (l.capacity_mbps - loads.get(id)) / objective.scale(l.capacity_mbps))
        .fold(f64::INFINITY, f64::min)
}

/// `true` when two weight maps pick identical routes for every ordered pair.
pub fn same_routes(net: &Network, a: &[f64], b: &[f64]) -> Result<bool> {
    for (s, _) in net.nodes() {
        for (t, _) in net.nodes() {
            if s != t && shortest_path(net, a, s, t)? != shortest_path(net, b, s, t)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
