//! CSV, gnuplot and JSON artifacts. Numbers use fixed precision so reruns
//! are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use mtroute_core::baselines::{SelectionOutcome, SelectionRecord};
use mtroute_core::flow::TrafficDemand;
use mtroute_core::graph::{LinkLoadMap, Network};

use crate::experiment::{Algorithm, Context, IntervalResult, Sweep, OPTIMAL_OBJECTIVE};
use crate::formats::OptimalDoc;

pub const REPORT_HEADER: [&str; 8] = [
    "interval",
    "algorithm",
    "mrc",
    "mlu",
    "perf_ratio",
    "mos_min",
    "mos_max",
    "rejections",
];

pub const TRACE_HEADER: [&str; 11] = [
    "interval",
    "algorithm",
    "demand_id",
    "s",
    "t",
    "class",
    "D_tau_ms",
    "chosen_k",
    "path_delay_ms",
    "gamma",
    "status",
];

pub const DEMAND_HEADER: [&str; 6] = ["interval", "src", "dst", "class", "mbps", "d_tau_ms"];

pub const LOAD_HEADER: [&str; 7] = ["interval", "algorithm", "src", "dst", "capacity_mbps", "f_mbps", "utilization"];

pub const ERROR_HEADER: [&str; 3] = ["interval", "algorithm", "message"];

/// Six decimals; negative zero prints as zero.
pub fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_writer(path: &Path) -> io::Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(into_io)
}

fn into_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn report_rows(intervals: &[IntervalResult]) -> Vec<[String; 8]> {
    let mut rows = Vec::new();
    for iv in intervals {
        for r in &iv.results {
            rows.push([
                iv.interval.to_string(),
                r.algorithm.to_string(),
                num(r.mrc),
                num(r.mlu),
                opt_num(r.perf_ratio.map(|p| p.value)),
                opt_num(r.mos.map(|m| m.min)),
                opt_num(r.mos.map(|m| m.max)),
                r.rejections.to_string(),
            ]);
        }
    }
    rows
}

pub fn trace_row(net: &Network, interval: u32, alg: Algorithm, rec: &SelectionRecord) -> [String; 11] {
    let d = &rec.demand;
    let (k, delay, gamma) = match &rec.outcome {
        SelectionOutcome::Selected(s) => (s.topology.to_string(), s.path.delay_ms().to_string(), num(s.gamma)),
        SelectionOutcome::Anchored { path, gamma } => (String::new(), path.delay_ms().to_string(), num(*gamma)),
        _ => (String::new(), String::new(), String::new()),
    };
    [
        interval.to_string(),
        alg.to_string(),
        d.id.to_string(),
        net.name(d.origin).to_string(),
        net.name(d.destination).to_string(),
        d.class.as_str().to_string(),
        d.delay_bound_ms.to_string(),
        k,
        delay,
        gamma,
        rec.outcome.status().to_string(),
    ]
}

pub fn demand_row(net: &Network, interval: u32, d: &TrafficDemand) -> [String; 6] {
    [
        interval.to_string(),
        net.name(d.origin).to_string(),
        net.name(d.destination).to_string(),
        d.class.as_str().to_string(),
        num(d.volume_mbps),
        d.delay_bound_ms.to_string(),
    ]
}

fn load_rows(net: &Network, interval: u32, alg: &str, loads: &LinkLoadMap) -> Vec<[String; 7]> {
    net.links()
        .map(|(id, l)| {
            let f = loads.get(id);
            [
                interval.to_string(),
                alg.to_string(),
                net.name(l.src).to_string(),
                net.name(l.dst).to_string(),
                num(l.capacity_mbps),
                num(f),
                num(f / l.capacity_mbps),
            ]
        })
        .collect()
}

fn write_csv<const N: usize>(path: &Path, header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(into_io)?;
    for r in rows {
        w.write_record(&r).map_err(into_io)?;
    }
    w.flush()
}

fn write_dat(path: &Path, header: &[String], rows: &[Vec<String>]) -> io::Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "# {}", header.join(" "))?;
    for r in rows {
        writeln!(f, "{}", r.join(" "))?;
    }
    f.flush()
}

fn dat_value(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "?".to_string())
}

/// Per-algorithm performance ratios, each column sorted ascending.
pub fn sorted_ratios(ctx: &Context, intervals: &[IntervalResult]) -> Vec<(Algorithm, Vec<f64>)> {
    ctx.algorithms
        .iter()
        .map(|&a| {
            let mut v: Vec<f64> = intervals
                .iter()
                .filter_map(|iv| iv.get(a).and_then(|r| r.perf_ratio).map(|p| p.value))
                .collect();
            v.sort_by(f64::total_cmp);
            (a, v)
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct AlgorithmSummary {
    intervals: usize,
    mean_mrc: f64,
    min_mrc: f64,
    mean_perf_ratio: Option<f64>,
    rejections: usize,
    anchored_over_bound: usize,
    dominance_violations: usize,
    constraint_violations: usize,
}

#[derive(Debug, Serialize)]
struct Summary {
    interval_range: [u32; 2],
    interval_count: usize,
    algorithms: Vec<String>,
    nodes: usize,
    links: usize,
    discovery_horizon: u32,
    realtime_share: f64,
    d_realtime_ms: u32,
    d_nonrealtime_ms: u32,
    optimal_objective: &'static str,
    seed: Option<u64>,
    mos_interval: u32,
    n_flows: u32,
    per_algorithm: BTreeMap<String, AlgorithmSummary>,
    errors: usize,
}

fn summary(ctx: &Context, sweep: &Sweep, seed: Option<u64>) -> Summary {
    let mut per = BTreeMap::new();
    for &a in &ctx.algorithms {
        let rs: Vec<_> = sweep.intervals.iter().filter_map(|iv| iv.get(a)).collect();
        let n = rs.len();
        let ratios: Vec<f64> = rs.iter().filter_map(|r| r.perf_ratio.map(|p| p.value)).collect();
        per.insert(
            a.to_string(),
            AlgorithmSummary {
                intervals: n,
                mean_mrc: if n == 0 { 0.0 } else { rs.iter().map(|r| r.mrc).sum::<f64>() / n as f64 },
                min_mrc: if n == 0 { 0.0 } else { rs.iter().map(|r| r.mrc).fold(f64::INFINITY, f64::min) },
                mean_perf_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
                rejections: rs.iter().map(|r| r.rejections).sum(),
                anchored_over_bound: rs
                    .iter()
                    .flat_map(|r| r.trace.iter())
                    .filter(|t| matches!(t.outcome, SelectionOutcome::Anchored { gamma, .. } if gamma > 1.0))
                    .count(),
                dominance_violations: rs
                    .iter()
                    .filter(|r| r.perf_ratio.is_some_and(|p| p.dominance_violation))
                    .count(),
                constraint_violations: rs.iter().filter(|r| r.violation.is_some()).count(),
            },
        );
    }
    Summary {
        interval_range: [ctx.cfg.interval_range.0, ctx.cfg.interval_range.1],
        interval_count: sweep.intervals.len(),
        algorithms: ctx.algorithms.iter().map(|a| a.to_string()).collect(),
        nodes: ctx.net.node_count(),
        links: ctx.net.link_count(),
        discovery_horizon: ctx.horizon,
        realtime_share: ctx.cfg.realtime_share,
        d_realtime_ms: ctx.cfg.d_realtime_ms,
        d_nonrealtime_ms: ctx.cfg.d_nonrealtime_ms,
        optimal_objective: OPTIMAL_OBJECTIVE.as_str(),
        seed,
        mos_interval: sweep.mos_series.interval,
        n_flows: ctx.eval.n_flows,
        per_algorithm: per,
        errors: sweep.errors().count(),
    }
}

pub const RUN_FILES: [&str; 11] = [
    "report.csv",
    "selection_trace.csv",
    "demands.csv",
    "loads.csv",
    "errors.csv",
    "mrc.dat",
    "mlu.dat",
    "perf_ratio_sorted.dat",
    "mos_vs_flows.dat",
    "summary.json",
    "network.json",
];

/// Writes every run artifact into `dir`, creating it if needed.
pub fn write_run(ctx: &Context, sweep: &Sweep, dir: &Path, seed: Option<u64>) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_tables(ctx, &sweep.intervals, dir)?;

    let names: Vec<String> = ctx.algorithms.iter().map(|a| a.to_string()).collect();
    for (file, pick) in [("mrc.dat", true), ("mlu.dat", false)] {
        let mut header = vec!["interval".to_string()];
        header.extend(names.iter().cloned());
        let rows: Vec<Vec<String>> = sweep
            .intervals
            .iter()
            .map(|iv| {
                let mut row = vec![iv.interval.to_string()];
                row.extend(
                    ctx.algorithms
                        .iter()
                        .map(|&a| dat_value(iv.get(a).map(|r| if pick { r.mrc } else { r.mlu }))),
                );
                row
            })
            .collect();
        write_dat(&dir.join(file), &header, &rows)?;
    }

    let sorted = sorted_ratios(ctx, &sweep.intervals);
    let len = sorted.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut header = vec!["rank".to_string()];
    header.extend(names.iter().cloned());
    let rows: Vec<Vec<String>> = (0..len)
        .map(|i| {
            let mut row = vec![(i + 1).to_string()];
            row.extend(sorted.iter().map(|(_, v)| dat_value(v.get(i).copied())));
            row
        })
        .collect();
    write_dat(&dir.join("perf_ratio_sorted.dat"), &header, &rows)?;

    let ms = &sweep.mos_series;
    let mut header = vec![format!("flows(interval={})", ms.interval)];
    header.extend(ms.columns.iter().map(|(a, _)| a.to_string()));
    let rows: Vec<Vec<String>> = ms
        .flows
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mut row = vec![n.to_string()];
            row.extend(ms.columns.iter().map(|(_, c)| dat_value(c[i])));
            row
        })
        .collect();
    write_dat(&dir.join("mos_vs_flows.dat"), &header, &rows)?;

    let mut s = serde_json::to_string_pretty(&summary(ctx, sweep, seed)).map_err(io::Error::other)?;
    s.push('\n');
    fs::write(dir.join("summary.json"), s)?;
    let mut n = serde_json::to_string_pretty(&crate::formats::NetworkDoc::from_network(&ctx.net)).map_err(io::Error::other)?;
    n.push('\n');
    fs::write(dir.join("network.json"), n)
}

/// The CSV tables shared by `route` and `run`.
pub fn write_tables(ctx: &Context, intervals: &[IntervalResult], dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("report.csv"), REPORT_HEADER, report_rows(intervals))?;
    write_csv(
        &dir.join("selection_trace.csv"),
        TRACE_HEADER,
        intervals.iter().flat_map(|iv| {
            iv.results
                .iter()
                .flat_map(move |r| r.trace.iter().map(move |t| trace_row(&ctx.net, iv.interval, r.algorithm, t)))
        }),
    )?;
    write_csv(
        &dir.join("demands.csv"),
        DEMAND_HEADER,
        intervals
            .iter()
            .flat_map(|iv| iv.demands.iter().map(move |d| demand_row(&ctx.net, iv.interval, d))),
    )?;
    write_csv(
        &dir.join("loads.csv"),
        LOAD_HEADER,
        intervals.iter().flat_map(|iv| {
            iv.results
                .iter()
                .flat_map(move |r| load_rows(&ctx.net, iv.interval, &r.algorithm.to_string(), r.assignment.loads()))
        }),
    )?;
    write_csv(
        &dir.join("errors.csv"),
        ERROR_HEADER,
        intervals
            .iter()
            .flat_map(|iv| iv.errors.iter())
            .map(|e| [e.interval.to_string(), e.algorithm.clone(), e.message.clone()]),
    )
}

/// Optimal reference solution of one interval as JSON, if it was solved.
pub fn write_optimal(ctx: &Context, iv: &IntervalResult, path: &Path) -> io::Result<bool> {
    let Some(sol) = &iv.optimal else {
        return Ok(false);
    };
    let mut s = serde_json::to_string_pretty(&OptimalDoc::new(&ctx.net, sol)).map_err(io::Error::other)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(true)
}
