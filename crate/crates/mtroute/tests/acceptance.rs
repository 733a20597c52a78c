//! End-to-end acceptance checks. Each criterion prints one `[PASS]` or
//! `[FAIL]` line; the process exits non-zero if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mtroute::config::{load, Overrides};
use mtroute::experiment::{run_sweep, Algorithm, Context, Sweep};
use mtroute_core::baselines::{simple_paths, solve_optimal, verify_optimal, SelectionOutcome};
use mtroute_core::flow::{TrafficClass, TrafficDemand, SLA_REJECTION};
use mtroute_core::graph::{LinkId, Network, NodeId, NodeKind};
use mtroute_core::layered::{build_layered, LayeredGraph, LayeredHop, LayeredNode};
use mtroute_core::qoe::{mos, MosModel};
use mtroute_core::topologies::discover_topologies;
use mtroute_core::Error;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// `(src, dst, delay, capacity)` links over nodes `n0..n{count-1}`.
fn build(count: usize, links: &[(usize, usize, u32, f64)]) -> Network {
    let mut b = Network::builder();
    for i in 0..count {
        b.node(format!("n{i}"), NodeKind::Router);
    }
    for &(s, d, delay, cap) in links {
        b.link(format!("n{s}"), format!("n{d}"), cap, delay);
    }
    b.build().unwrap()
}

/// A strongly connected digraph: a random Hamiltonian cycle plus extra links.
fn strongly_connected(rng: &mut StdRng, count: usize, max_delay: u32, density: f64) -> Network {
    let mut order: Vec<usize> = (0..count).collect();
    for i in (1..count).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut pairs = BTreeSet::new();
    if count > 1 {
        for i in 0..count {
            pairs.insert((order[i], order[(i + 1) % count]));
        }
    }
    for a in 0..count {
        for b in 0..count {
            if a != b && rng.gen_bool(density) {
                pairs.insert((a, b));
            }
        }
    }
    let links: Vec<_> = pairs
        .into_iter()
        .map(|(a, b)| (a, b, rng.gen_range(1..=max_delay), f64::from(rng.gen_range(10u32..=40))))
        .collect();
    build(count, &links)
}

fn random_digraph(rng: &mut StdRng, count: usize, max_delay: u32, density: f64) -> Network {
    let mut links = Vec::new();
    for a in 0..count {
        for b in 0..count {
            if a != b && rng.gen_bool(density) {
                links.push((a, b, rng.gen_range(1..=max_delay), f64::from(rng.gen_range(10u32..=40))));
            }
        }
    }
    build(count, &links)
}

fn disjointness() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x6d74_0001);
    let (mut checked, mut vacuous, mut topologies) = (0, 0, 0);
    let mut violations = Vec::new();
    for case in 0..200 {
        let n = rng.gen_range(2..=10);
        let net = strongly_connected(&mut rng, n, 4, 0.25);
        let horizon = rng.gen_range(1..=10);
        let s = NodeId(rng.gen_range(0..n));
        match discover_topologies(&net, horizon, s) {
            Err(Error::NoTopologies(_)) if net.out_links(s).iter().all(|&l| net.link(l).delay_ms >= horizon) => vacuous += 1,
            Err(e) => violations.push(format!("case {case}: {e}")),
            Ok(tops) => {
                checked += 1;
                topologies += tops.len();
                let mut owner: Vec<Option<usize>> = vec![None; net.link_count()];
                for t in &tops {
                    for &l in t.links() {
                        if let Some(prev) = owner[l.0].replace(t.index()) {
                            violations.push(format!("case {case}: link {} in topologies {prev} and {}", net.link_label(l), t.index()));
                        }
                    }
                }
            }
        }
    }
    let took = start.elapsed();
    let detail = format!(
        "200 strongly connected digraphs ({checked} with topologies, {vacuous} without usable out-links, {topologies} topologies), {} violations, {}",
        violations.len(),
        secs(took)
    );
    if violations.is_empty() && took < Duration::from_secs(10) {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", violations.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

fn layered_walks(g: &LayeredGraph<'_>, s: NodeId) -> Vec<(Vec<LayeredHop>, LayeredNode)> {
    fn go(g: &LayeredGraph<'_>, at: LayeredNode, hops: &mut Vec<LayeredHop>, out: &mut Vec<(Vec<LayeredHop>, LayeredNode)>) {
        out.push((hops.clone(), at));
        for a in g.out_arcs(at) {
            hops.push(LayeredHop::Arc(a));
            go(g, g.arc(a).head, hops, out);
            hops.pop();
        }
    }
    let mut out = Vec::new();
    go(g, LayeredNode { node: s, layer: 1 }, &mut Vec::new(), &mut out);
    out
}

fn original_walks(net: &Network, s: NodeId, budget: u32) -> BTreeSet<Vec<LinkId>> {
    fn go(net: &Network, at: NodeId, left: u32, seq: &mut Vec<LinkId>, out: &mut BTreeSet<Vec<LinkId>>) {
        out.insert(seq.clone());
        for (id, l) in net.links() {
            if l.src == at && l.delay_ms <= left {
                seq.push(id);
                go(net, l.dst, left - l.delay_ms, seq, out);
                seq.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(net, s, budget, &mut Vec::new(), &mut out);
    out
}

fn is_simple(net: &Network, s: NodeId, links: &[LinkId]) -> bool {
    let mut seen = BTreeSet::from([s]);
    links.iter().all(|&l| seen.insert(net.link(l).dst))
}

fn layered_correspondence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x6d74_0002);
    let (mut walks, mut simple, mut sources) = (0usize, 0usize, 0usize);
    let mut violations = Vec::new();
    for case in 0..60 {
        let n = rng.gen_range(2..=5);
        let net = random_digraph(&mut rng, n, 3, 0.4);
        let horizon = rng.gen_range(1..=8);
        let g = build_layered(&net, horizon).unwrap();
        for s in (0..n).map(NodeId) {
            sources += 1;
            let mut mapped = BTreeSet::new();
            for (hops, end) in layered_walks(&g, s) {
                let (walk, delay) = g.to_original_walk(&hops).unwrap();
                let recount: u32 = walk.iter().map(|&l| net.link(l).delay_ms).sum();
                if delay >= horizon || delay != recount || delay != end.layer - 1 {
                    violations.push(format!("case {case}: walk delay {delay} at layer {}", end.layer));
                }
                let simple_walk = is_simple(&net, s, &walk);
                match g.to_original_path(&hops) {
                    Ok(p) if simple_walk && p.links() == &walk[..] => simple += 1,
                    Err(_) if !simple_walk => {}
                    _ => violations.push(format!("case {case}: path mapping disagrees with walk")),
                }
                if !mapped.insert(walk) {
                    violations.push(format!("case {case}: two layered paths map to one walk"));
                }
            }
            walks += mapped.len();
            if mapped != original_walks(&net, s, horizon - 1) {
                violations.push(format!("case {case}: walk sets differ from source n{}", s.0));
            }
        }
    }
    let detail = format!(
        "60 digraphs, {sources} sources, {walks} walks ({simple} simple paths), {} violations",
        violations.len()
    );
    if violations.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", violations.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

fn gamma_bound(sweep: &Sweep) -> Outcome {
    let (mut selected, mut rejected) = (0, 0);
    let mut violations = Vec::new();
    for iv in &sweep.intervals {
        for r in iv.results.iter().filter(|r| matches!(r.algorithm, Algorithm::MDelay(_))) {
            for rec in &r.trace {
                match &rec.outcome {
                    SelectionOutcome::Selected(sel) => {
                        selected += 1;
                        let expect = f64::from(sel.path.delay_ms()) / f64::from(rec.demand.delay_bound_ms);
                        if !(sel.gamma > 0.0 && sel.gamma <= 1.0) || (sel.gamma - expect).abs() > 1e-12 {
                            violations.push(format!("interval {} {}: gamma {}", iv.interval, r.algorithm, sel.gamma));
                        }
                    }
                    SelectionOutcome::Rejected(_) => {
                        rejected += 1;
                        if rec.outcome.status() != SLA_REJECTION {
                            violations.push(format!("interval {} {}: status {}", iv.interval, r.algorithm, rec.outcome.status()));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    let detail = format!("{selected} selections, {rejected} rejections, {} violations", violations.len());
    if violations.is_empty() && selected > 0 {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", violations.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

/// Best `min(C - f)` over every split of every commodity onto its paths at
/// 1% steps.
fn grid_optimum(net: &Network, commodities: &[(f64, Vec<Vec<LinkId>>)]) -> f64 {
    fn splits(parts: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            splits(parts - 1, left - x, cur, out);
            cur.pop();
        }
    }
    fn go(net: &Network, cs: &[(f64, Vec<Vec<LinkId>>)], options: &[Vec<Vec<u32>>], i: usize, load: &mut Vec<f64>, best: &mut f64) {
        if i == cs.len() {
            let z = net.links().map(|(id, l)| l.capacity_mbps - load[id.0]).fold(f64::INFINITY, f64::min);
            *best = best.max(z);
            return;
        }
        let (volume, paths) = &cs[i];
        for split in &options[i] {
            for (p, &pct) in paths.iter().zip(split) {
                for l in p {
                    load[l.0] += volume * f64::from(pct) / 100.0;
                }
            }
            go(net, cs, options, i + 1, load, best);
            for (p, &pct) in paths.iter().zip(split) {
                for l in p {
                    load[l.0] -= volume * f64::from(pct) / 100.0;
                }
            }
        }
    }
    let options: Vec<Vec<Vec<u32>>> = commodities
        .iter()
        .map(|(_, paths)| {
            let mut out = Vec::new();
            splits(paths.len(), 100, &mut Vec::new(), &mut out);
            out
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    go(net, commodities, &options, 0, &mut vec![0.0; net.link_count()], &mut best);
    best
}

fn grid_points(paths: usize) -> usize {
    // Compositions of 100 into `paths` parts.
    (1..paths).fold(1, |acc, k| acc * (100 + k) / k)
}

fn lp_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x6d74_0004);
    let (mut accepted, mut worst_rel, mut split_instances) = (0, 0.0f64, 0);
    let mut violations = Vec::new();
    while accepted < 50 {
        let n = rng.gen_range(3..=5);
        let net = random_digraph(&mut rng, n, 3, 0.45);
        let mut pairs = BTreeSet::new();
        let mut commodities = Vec::new();
        let mut demands = Vec::new();
        let want = rng.gen_range(1..=3);
        for _ in 0..12 {
            if commodities.len() == want {
                break;
            }
            let (s, t) = (NodeId(rng.gen_range(0..n)), NodeId(rng.gen_range(0..n)));
            if s == t || !pairs.insert((s, t)) {
                continue;
            }
            let paths = simple_paths(&net, s, t);
            if paths.is_empty() || paths.len() > 3 {
                continue;
            }
            let volume = f64::from(rng.gen_range(2u32..=30)) / 2.0;
            demands.push(TrafficDemand::new(demands.len(), s, t, volume, TrafficClass::NonRealtime, 10).unwrap());
            commodities.push((volume, paths.iter().map(|p| p.links().to_vec()).collect::<Vec<_>>()));
        }
        let points: usize = commodities.iter().map(|(_, p)| grid_points(p.len())).product();
        if commodities.is_empty() || points > 600_000 {
            continue;
        }
        accepted += 1;
        if commodities.iter().any(|(_, p)| p.len() > 1) {
            split_instances += 1;
        }
        let sol = match solve_optimal(&net, &demands) {
            Ok(s) => s,
            Err(e) => {
                violations.push(format!("instance {accepted}: {e}"));
                continue;
            }
        };
        if let Err(v) = verify_optimal(&net, &sol, 1e-6) {
            violations.push(format!("instance {accepted}: {v:?}"));
        }
        let grid = grid_optimum(&net, &commodities);
        let rel = (sol.z_star - grid).abs() / sol.z_star.abs().max(1e-9);
        worst_rel = worst_rel.max(rel);
        if rel > 0.02 || grid > sol.z_star + 1e-6 {
            violations.push(format!("instance {accepted}: z* {} vs grid {grid}", sol.z_star));
        }
    }
    let took = start.elapsed();
    let detail = format!(
        "50 instances ({split_instances} with a choice of paths), worst relative gap {:.4}%, {} violations, {}",
        worst_rel * 100.0,
        violations.len(),
        secs(took)
    );
    if violations.is_empty() && took < Duration::from_secs(60) {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", violations.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

fn dominance(sweep: &Sweep) -> Outcome {
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    for iv in &sweep.intervals {
        let Some(opt) = iv.optimal_mrc else {
            violations.push(format!("interval {}: no optimum", iv.interval));
            continue;
        };
        for r in iv.results.iter().filter(|r| r.algorithm != Algorithm::Optimal) {
            worst = worst.min(opt - r.mrc);
            if r.mrc > opt + 1e-9 {
                violations.push(format!("interval {} {}: {} > {opt}", iv.interval, r.algorithm, r.mrc));
            }
        }
    }
    let detail = format!(
        "{} intervals, smallest margin {worst:.6}, {} violations",
        sweep.intervals.len(),
        violations.len()
    );
    if violations.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", violations.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

fn baseline_coincidence(sweep: &Sweep) -> Outcome {
    let mut differing = Vec::new();
    for iv in &sweep.intervals {
        let (Some(d), Some(i)) = (iv.get(Algorithm::DMetric), iv.get(Algorithm::InvCap)) else {
            differing.push(iv.interval);
            continue;
        };
        if d.assignment.loads() != i.assignment.loads() {
            differing.push(iv.interval);
        }
    }
    let detail = format!("{} intervals, {} with differing loads", sweep.intervals.len(), differing.len());
    if differing.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}: {differing:?}"))
    }
}

fn ordering(sweep: &Sweep) -> Outcome {
    let total = sweep.intervals.len();
    let (mut ordered, mut above_opt) = (0, Vec::new());
    for iv in &sweep.intervals {
        let m = |a| iv.get(a).map(|r| r.mrc).unwrap_or(f64::NAN);
        let (m40, m60, inv) = (m(Algorithm::MDelay(40)), m(Algorithm::MDelay(60)), m(Algorithm::InvCap));
        if m40 >= m60 - 1e-9 && m60 >= inv - 1e-9 {
            ordered += 1;
        }
        if !(m40 <= m(Algorithm::Optimal) + 1e-9) {
            above_opt.push(iv.interval);
        }
    }
    let detail = format!(
        "MDelay-40 >= MDelay-60 >= InvCap in {ordered}/{total} intervals, MDelay-40 above Optimal in {}",
        above_opt.len()
    );
    if total > 0 && ordered * 10 >= total * 9 && above_opt.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn mos_model(sweep: &Sweep) -> Outcome {
    let m = MosModel::default();
    let at = mos(5.091, &m);
    let mut problems = Vec::new();
    if (at.min - 1.515).abs() > 1e-9 || (at.max - 1.515).abs() > 1e-9 {
        problems.push(format!("mos(5.091) = {at:?}"));
    }
    let mut prev = mos(0.0, &m);
    for i in 0..1000 {
        let x = f64::from(i) * 2.0;
        let s = mos(x, &m);
        if s.min < prev.min || s.max < prev.max {
            problems.push(format!("decreases at {x}"));
        }
        if !(1.0..=5.0).contains(&s.min) || !(1.0..=5.0).contains(&s.max) {
            problems.push(format!("out of range at {x}"));
        }
        prev = s;
    }
    let series = &sweep.mos_series;
    for (alg, col) in &series.columns {
        let vals: Vec<f64> = col.iter().flatten().copied().collect();
        if vals.len() != series.flows.len() {
            problems.push(format!("{alg}: missing points"));
        }
        if vals.windows(2).any(|w| w[1] > w[0]) {
            problems.push(format!("{alg}: MOS rises with more flows"));
        }
    }
    let detail = format!(
        "mos(5.091) = {:.9}, 1000-point sweep monotone in [1, 5], {} series of {} points at interval {} non-increasing",
        at.min,
        series.columns.len(),
        series.flows.len(),
        series.interval
    );
    if problems.is_empty() {
        pass(detail)
    } else {
        fail(format!("{}; {}", detail, problems.join("; ")))
    }
}

fn conservation(ctx: &Context, sweep: &Sweep) -> Outcome {
    let net = &ctx.net;
    let mut routed = 0;
    let mut violations = Vec::new();
    for iv in &sweep.intervals {
        for r in &iv.results {
            let tol = if r.algorithm == Algorithm::Optimal { 1e-6 } else { 1e-9 };
            let mut recount = vec![0.0; net.link_count()];
            for rd in r.assignment.routed() {
                routed += 1;
                let d = &rd.demand;
                let mut bal = vec![0.0; net.node_count()];
                let mut sum = 0.0;
                for share in &rd.shares {
                    sum += share.fraction;
                    let mut at = d.origin;
                    for &l in share.path.links() {
                        let link = net.link(l);
                        if link.src != at {
                            violations.push(format!("interval {} {} demand {}: broken path", iv.interval, r.algorithm, d.id));
                        }
                        at = link.dst;
                        bal[link.src.0] += share.fraction;
                        bal[link.dst.0] -= share.fraction;
                        recount[l.0] += share.fraction * d.volume_mbps;
                    }
                    if at != d.destination {
                        violations.push(format!("interval {} {} demand {}: path ends elsewhere", iv.interval, r.algorithm, d.id));
                    }
                }
                for (v, b) in bal.iter().enumerate() {
                    let want = if v == d.origin.0 {
                        1.0
                    } else if v == d.destination.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    if (b - want).abs() > tol {
                        violations.push(format!("interval {} {} demand {}: balance {b} at {}", iv.interval, r.algorithm, d.id, net.name(NodeId(v))));
                    }
                }
                if (sum - 1.0).abs() > tol {
                    violations.push(format!("interval {} {} demand {}: fractions sum to {sum}", iv.interval, r.algorithm, d.id));
                }
            }
            for (id, _) in net.links() {
                if (recount[id.0] - r.assignment.loads().get(id)).abs() > 1e-6 {
                    violations.push(format!("interval {} {}: load on {} differs", iv.interval, r.algorithm, net.link_label(id)));
                }
            }
        }
    }
    let detail = format!("{routed} routed demands across all algorithms, {} violations", violations.len());
    if violations.is_empty() && routed > 0 {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", violations.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

fn run_binary(dir: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_mtroute"))
        .arg("run")
        .arg("--out")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(start.elapsed())
}

fn determinism(timings: &mut Vec<Duration>) -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        match run_binary(dir) {
            Ok(t) => timings.push(t),
            Err(e) => return fail(format!("run failed: {e}")),
        }
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut differing = Vec::new();
    let mut bytes = 0;
    for name in &names {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).ok());
        bytes += x.len();
        if y.as_deref() != Some(&x[..]) {
            differing.push(name.clone());
        }
    }
    let csvs = names.iter().filter(|n| n.ends_with(".csv")).count();
    let detail = format!("{} files ({csvs} CSV, {bytes} bytes), {} differ", names.len(), differing.len());
    if differing.is_empty() && csvs >= 5 {
        pass(detail)
    } else {
        fail(format!("{detail}: {differing:?}"))
    }
}

fn runtime(in_process: Duration, binary: &[Duration]) -> Outcome {
    let slowest = binary.iter().copied().max().unwrap_or(Duration::ZERO);
    let detail = format!(
        "33 intervals x 5 algorithms: in-process {}, binary runs up to {}",
        secs(in_process),
        secs(slowest)
    );
    if in_process < Duration::from_secs(60) && slowest < Duration::from_secs(60) && !binary.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn main() {
    let start = Instant::now();
    let setup = load(None, &Overrides::default()).expect("default scenario loads");
    let ctx = Context::new(setup.cfg, setup.eval, setup.network, Algorithm::defaults()).expect("reference context");
    let sweep = run_sweep(&ctx);
    let sweep_time = start.elapsed();

    let mut binary = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("disjointness", Box::new(disjointness)),
        ("layered correspondence", Box::new(layered_correspondence)),
        ("gamma bound", Box::new(|| gamma_bound(&sweep))),
        ("LP correctness", Box::new(lp_correctness)),
        ("optimality dominance", Box::new(|| dominance(&sweep))),
        ("baseline coincidence", Box::new(|| baseline_coincidence(&sweep))),
        ("ordering", Box::new(|| ordering(&sweep))),
        ("MOS model", Box::new(|| mos_model(&sweep))),
        ("conservation", Box::new(|| conservation(&ctx, &sweep))),
        ("determinism", Box::new(|| determinism(&mut binary))),
    ];
    let mut failed = 0;
    let mut report = |i: usize, name: &str, o: Outcome| {
        if !o.ok {
            failed += 1;
        }
        println!("[{}] {i:>2} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    };
    let errors = sweep.errors().count();
    if errors > 0 {
        println!("note: the reference sweep produced {errors} error rows");
    }
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let o = check();
        report(i + 1, name, o);
    }
    report(11, "runtime", runtime(sweep_time, &binary));
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
