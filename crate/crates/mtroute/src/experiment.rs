//! Per-interval evaluation of every routing algorithm on one scenario.

use std::fmt;

use rayon::prelude::*;

use mtroute_core::baselines::{
    discover_for_sources, route_mdelay, route_shortest, solve_optimal_with, verify_optimal, weights_dmetric,
    weights_invcap, Objective, OptimalSolution, SelectionRecord, TopologyIndex,
};
use mtroute_core::flow::{verify_routing, RoutingAssignment, TrafficClass, TrafficDemand};
use mtroute_core::graph::{Network, NodeId};
use mtroute_core::qoe::{
    bottleneck_capacity, link_utilization, mlu, mos, mrc, path_bitrate, per_flow_bitrate, perf_ratio, MosScore,
    PerfRatio,
};
use mtroute_core::scenario::{generate_interval_demands, ScenarioConfig};

use crate::diag::{Diagnostic, Diagnostics};
use crate::formats::Evaluation;

/// Objective of the Optimal baseline in experiments. Its optimum is the
/// largest achievable MRC, so it upper-bounds every heuristic's MRC.
pub const OPTIMAL_OBJECTIVE: Objective = Objective::ResidualRatio;

/// Tolerance for the constraint re-checks recorded in the summary.
pub const CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    DMetric,
    InvCap,
    /// Anchor-aware scheme with the given realtime share in percent.
    MDelay(u32),
    Optimal,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::DMetric => f.write_str("DMetric"),
            Algorithm::InvCap => f.write_str("InvCap"),
            Algorithm::MDelay(p) => write!(f, "MDelay-{p}"),
            Algorithm::Optimal => f.write_str("Optimal"),
        }
    }
}

impl Algorithm {
    pub fn defaults() -> Vec<Algorithm> {
        vec![
            Algorithm::DMetric,
            Algorithm::InvCap,
            Algorithm::MDelay(40),
            Algorithm::MDelay(60),
            Algorithm::Optimal,
        ]
    }

    /// Case-insensitive. `MDelay` alone takes `default_share`; `MDelay-40`
    /// and `MDelay-40%` name the share explicitly.
    pub fn parse(name: &str, default_share: f64) -> Result<Algorithm, String> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "dmetric" => return Ok(Algorithm::DMetric),
            "invcap" => return Ok(Algorithm::InvCap),
            "optimal" => return Ok(Algorithm::Optimal),
            "mdelay" => return Ok(Algorithm::MDelay((default_share * 100.0).round() as u32)),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix("mdelay-") {
            let digits = rest.strip_suffix('%').unwrap_or(rest);
            if let Ok(p) = digits.parse::<u32>() {
                if p <= 100 {
                    return Ok(Algorithm::MDelay(p));
                }
            }
        }
        Err(format!(
            "unknown algorithm '{name}', expected DMetric, InvCap, MDelay, MDelay-<percent> or Optimal"
        ))
    }

    /// Parses a list, dropping duplicates while keeping first-seen order.
    pub fn parse_list<S: AsRef<str>>(names: &[S], default_share: f64) -> Result<Vec<Algorithm>, String> {
        let mut out = Vec::new();
        for n in names {
            let a = Algorithm::parse(n.as_ref(), default_share)?;
            if !out.contains(&a) {
                out.push(a);
            }
        }
        if out.is_empty() {
            return Err("at least one algorithm is required".to_string());
        }
        Ok(out)
    }
}

pub fn check_algorithm_names(file: &str, text: Option<&str>, names: &[String]) -> Diagnostics {
    let mut issues = Vec::new();
    for (i, n) in names.iter().enumerate() {
        if let Err(m) = Algorithm::parse(n, 0.0) {
            issues.push(mtroute_core::scenario::Issue {
                location: format!("algorithms[{i}]"),
                message: m,
            });
        }
    }
    if names.is_empty() {
        issues.push(mtroute_core::scenario::Issue {
            location: "algorithms".to_string(),
            message: "at least one algorithm is required".to_string(),
        });
    }
    crate::formats::anchor_issues(file, text, issues)
}

/// Everything shared by the intervals of one run.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: ScenarioConfig,
    pub eval: Evaluation,
    pub net: Network,
    pub algorithms: Vec<Algorithm>,
    pub anchor: NodeId,
    pub horizon: u32,
    pub topologies: TopologyIndex,
}

impl Context {
    pub fn new(cfg: ScenarioConfig, eval: Evaluation, net: Network, algorithms: Vec<Algorithm>) -> Result<Self, Diagnostics> {
        let fail = |loc: &str, m: String| Diagnostics::single(Diagnostic::new("<scenario>", loc, m));
        if algorithms.is_empty() {
            return Err(fail("algorithms", "at least one algorithm is required".into()));
        }
        let anchor = net
            .node_id(&cfg.central_anchor)
            .ok_or_else(|| fail("central_anchor", format!("node '{}' is not in the network", cfg.central_anchor)))?;
        let first = cfg.interval_range.0;
        let demands = generate_interval_demands(&cfg, &net, first).map_err(|e| fail("", e.to_string()))?;
        let horizon = cfg.discovery_horizon();
        let topologies = discover_for_sources(&net, horizon, demands.demands.iter().map(|d| d.origin))
            .map_err(|e| fail("", e.to_string()))?;
        Ok(Context {
            cfg,
            eval,
            net,
            algorithms,
            anchor,
            horizon,
            topologies,
        })
    }

    pub fn intervals(&self) -> Vec<u32> {
        self.cfg.intervals().collect()
    }

    /// Interval with the largest profile weight; the earliest on ties.
    pub fn busiest_interval(&self) -> u32 {
        let mut best = self.cfg.interval_range.0;
        for i in self.cfg.intervals() {
            if self.cfg.diurnal_profile[i as usize - 1] > self.cfg.diurnal_profile[best as usize - 1] {
                best = i;
            }
        }
        best
    }

    fn demands_at(&self, interval: u32, share: f64) -> Result<Vec<TrafficDemand>, String> {
        let mut cfg = self.cfg.clone();
        cfg.realtime_share = share;
        generate_interval_demands(&cfg, &self.net, interval)
            .map(|d| d.demands)
            .map_err(|e| e.to_string())
    }
}

/// Headroom of the realtime paths of one routing, in Kbps for a single flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealtimeHeadroom {
    pub worst_kbps: f64,
    pub best_kbps: f64,
}

impl RealtimeHeadroom {
    /// Worst path's lower score and best path's upper score with `n_flows`
    /// flows per path.
    pub fn mos(&self, eval: &Evaluation, n_flows: u32) -> MosScore {
        let n = f64::from(n_flows.max(1));
        let lo = mos(self.worst_kbps / n, &eval.mos);
        let hi = mos(self.best_kbps / n, &eval.mos);
        MosScore {
            min: lo.min,
            max: hi.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    /// The demands this algorithm was given.
    pub demands: Vec<TrafficDemand>,
    pub assignment: RoutingAssignment,
    /// Per-demand decisions; empty for algorithms that do not select.
    pub trace: Vec<SelectionRecord>,
    /// Demands that carry no load: SLA rejections and unreachable pairs.
    pub rejections: usize,
    pub mrc: f64,
    pub mlu: f64,
    pub perf_ratio: Option<PerfRatio>,
    pub headroom: Option<RealtimeHeadroom>,
    pub mos: Option<MosScore>,
    /// First violated routing constraint, if any.
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorRow {
    pub interval: u32,
    pub algorithm: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalResult {
    pub interval: u32,
    /// Demands at the scenario's own realtime share.
    pub demands: Vec<TrafficDemand>,
    /// Reference optimum used for performance ratios.
    pub optimal: Option<OptimalSolution>,
    pub optimal_mrc: Option<f64>,
    pub results: Vec<AlgorithmResult>,
    pub errors: Vec<ErrorRow>,
}

impl IntervalResult {
    pub fn get(&self, a: Algorithm) -> Option<&AlgorithmResult> {
        self.results.iter().find(|r| r.algorithm == a)
    }
}

fn headroom(net: &Network, assignment: &RoutingAssignment) -> Option<RealtimeHeadroom> {
    let util = link_utilization(net, assignment.loads());
    let mut out: Option<RealtimeHeadroom> = None;
    for r in assignment.routed().iter().filter(|r| r.demand.class == TrafficClass::Realtime) {
        for s in &r.shares {
            let x = per_flow_bitrate(path_bitrate(&s.path, &util).max(0.0), bottleneck_capacity(net, &s.path), 1)
                .expect("one flow");
            out = Some(match out {
                None => RealtimeHeadroom {
                    worst_kbps: x,
                    best_kbps: x,
                },
                Some(h) => RealtimeHeadroom {
                    worst_kbps: h.worst_kbps.min(x),
                    best_kbps: h.best_kbps.max(x),
                },
            });
        }
    }
    out
}

/// Runs every algorithm on one interval. Failures become error rows.
pub fn run_interval(ctx: &Context, interval: u32) -> IntervalResult {
    let mut errors = Vec::new();
    let mut err = |alg: &str, m: String| {
        errors.push(ErrorRow {
            interval,
            algorithm: alg.to_string(),
            message: m,
        })
    };
    let base = match ctx.demands_at(interval, ctx.cfg.realtime_share) {
        Ok(d) => d,
        Err(m) => {
            err("*", m);
            return IntervalResult {
                interval,
                demands: Vec::new(),
                optimal: None,
                optimal_mrc: None,
                results: Vec::new(),
                errors,
            };
        }
    };
    let optimal = match solve_optimal_with(&ctx.net, &base, OPTIMAL_OBJECTIVE) {
        Ok(s) => Some(s),
        Err(e) => {
            err("Optimal", e.to_string());
            None
        }
    };
    let optimal_mrc = optimal.as_ref().map(|s| mrc(&ctx.net, &s.loads));

    let mut results = Vec::new();
    for &alg in &ctx.algorithms {
        let name = alg.to_string();
        let routed: Result<(Vec<TrafficDemand>, RoutingAssignment, Vec<SelectionRecord>, usize), String> = match alg {
            Algorithm::DMetric | Algorithm::InvCap => {
                let w = if alg == Algorithm::DMetric {
                    weights_dmetric(&ctx.net)
                } else {
                    weights_invcap(&ctx.net)
                };
                route_shortest(&ctx.net, &w, &base)
                    .map(|r| (base.clone(), r.assignment, Vec::new(), r.unreachable.len()))
                    .map_err(|e| e.to_string())
            }
            Algorithm::MDelay(p) => ctx.demands_at(interval, f64::from(p) / 100.0).and_then(|d| {
                route_mdelay(&ctx.net, &ctx.topologies, &d, ctx.anchor)
                    .map(|r| {
                        let rejected = r.trace.iter().filter(|t| t.outcome.path().is_none()).count();
                        (d, r.assignment, r.trace, rejected)
                    })
                    .map_err(|e| e.to_string())
            }),
            Algorithm::Optimal => match &optimal {
                Some(s) => s
                    .to_assignment(&ctx.net, &base)
                    .map(|a| (base.clone(), a, Vec::new(), 0))
                    .map_err(|e| e.to_string()),
                None => Err("no optimal solution".to_string()),
            },
        };
        let (demands, assignment, trace, rejections) = match routed {
            Ok(r) => r,
            Err(m) => {
                if alg != Algorithm::Optimal {
                    err(&name, m);
                }
                continue;
            }
        };
        let loads = assignment.loads();
        let m = mrc(&ctx.net, loads);
        let ratio = optimal_mrc.and_then(|o| perf_ratio(m, o).ok());
        let mut violation = verify_routing(&ctx.net, &assignment, CHECK_TOL).err().map(|v| format!("{v:?}"));
        if alg == Algorithm::Optimal {
            if let Some(s) = &optimal {
                if let Err(v) = verify_optimal(&ctx.net, s, CHECK_TOL) {
                    violation.get_or_insert(format!("{v:?}"));
                }
            }
        }
        let head = headroom(&ctx.net, &assignment);
        results.push(AlgorithmResult {
            algorithm: alg,
            mlu: mlu(&ctx.net, loads),
            mrc: m,
            perf_ratio: ratio,
            mos: head.map(|h| h.mos(&ctx.eval, ctx.eval.n_flows)),
            headroom: head,
            demands,
            assignment,
            trace,
            rejections,
            violation,
        });
    }
    IntervalResult {
        interval,
        demands: base,
        optimal,
        optimal_mrc,
        results,
        errors,
    }
}

/// MOS of the worst realtime path as the number of flows sharing it grows.
#[derive(Debug, Clone, PartialEq)]
pub struct MosSeries {
    pub interval: u32,
    pub flows: Vec<u32>,
    /// One column per algorithm, aligned with `flows`.
    pub columns: Vec<(Algorithm, Vec<Option<f64>>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub intervals: Vec<IntervalResult>,
    pub mos_series: MosSeries,
}

impl Sweep {
    pub fn errors(&self) -> impl Iterator<Item = &ErrorRow> {
        self.intervals.iter().flat_map(|i| i.errors.iter())
    }
}

pub fn mos_series(ctx: &Context, at: &IntervalResult) -> MosSeries {
    let (first, last, step) = ctx.eval.flow_sweep;
    let flows: Vec<u32> = (first..=last).step_by(step.max(1) as usize).collect();
    let columns = ctx
        .algorithms
        .iter()
        .map(|&a| {
            let head = at.get(a).and_then(|r| r.headroom);
            (a, flows.iter().map(|&n| head.map(|h| h.mos(&ctx.eval, n).min)).collect())
        })
        .collect();
    MosSeries {
        interval: at.interval,
        flows,
        columns,
    }
}

/// All intervals in parallel, merged in interval order.
pub fn run_sweep(ctx: &Context) -> Sweep {
    let intervals: Vec<IntervalResult> = ctx.intervals().into_par_iter().map(|i| run_interval(ctx, i)).collect();
    let busiest = ctx.busiest_interval();
    let at = intervals.iter().find(|r| r.interval == busiest).expect("busiest interval is in range");
    let mos_series = mos_series(ctx, at);
    Sweep { intervals, mos_series }
}
