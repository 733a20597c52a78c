//! `mtroute` subcommands.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use mtroute_core::topologies::{augment_leftover_links, discover_topologies};

use crate::config::{load, validate_file, Overrides, Setup};
use crate::diag::{Diagnostic, Diagnostics};
use crate::experiment::{run_interval, run_sweep, Algorithm, Context};
use crate::formats::TopologySetDoc;
use crate::output::{write_optimal, write_run, write_tables};

#[derive(Debug, Parser)]
#[command(name = "mtroute", version, about = "Delay-aware multi-topology routing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check network, scenario and manifest files.
    Validate {
        /// Files to check, in addition to --config.
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Discover logical topologies and write them as JSON.
    Discover {
        #[command(flatten)]
        common: Common,
        /// Source node; repeatable. Defaults to every demand origin.
        #[arg(long)]
        source: Vec<String>,
        /// Layered-graph horizon; defaults to the largest delay bound + 1.
        #[arg(long)]
        horizon: Option<u32>,
        /// Skip the leftover-link augmentation.
        #[arg(long)]
        no_augment: bool,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Route one interval with every selected algorithm.
    Route {
        #[command(flatten)]
        common: Common,
        /// 1-based half-hour interval of the day.
        #[arg(long)]
        interval: u32,
        /// Comma-separated, e.g. `DMetric,MDelay-40,Optimal`.
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep every interval and write all reports.
    Run {
        #[command(flatten)]
        common: Common,
        /// Comma-separated; the manifest's list or all five when absent.
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
        /// Output directory; overrides the manifest's.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Manifest or scenario file; the reference scenario when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fraction of every demand that is realtime, in [0, 1].
    #[arg(long)]
    realtime_share: Option<f64>,
    /// Delay bound for realtime traffic.
    #[arg(long)]
    d_realtime_ms: Option<u32>,
    /// Delay bound for non-realtime traffic.
    #[arg(long)]
    d_nonrealtime_ms: Option<u32>,
    /// `default`, `flat`, or a file with 48 weights.
    #[arg(long)]
    profile: Option<String>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            realtime_share: self.realtime_share,
            d_realtime_ms: self.d_realtime_ms,
            d_nonrealtime_ms: self.d_nonrealtime_ms,
            profile: self.profile.clone(),
        }
    }

    fn setup(&self) -> Result<Setup, Diagnostics> {
        load(self.config.as_deref(), &self.overrides())
    }
}

fn algorithms(flag: &[String], setup: &Setup) -> Result<Vec<Algorithm>, Diagnostics> {
    let names: Vec<String> = if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(m) = &setup.algorithms {
        m.clone()
    } else {
        return Ok(Algorithm::defaults());
    };
    Algorithm::parse_list(&names, setup.cfg.realtime_share)
        .map_err(|m| Diagnostics::single(Diagnostic::new("--algorithms", "", m)))
}

fn context(common: &Common, flag: &[String]) -> Result<(Context, Setup), Diagnostics> {
    let setup = common.setup()?;
    let algs = algorithms(flag, &setup)?;
    let ctx = Context::new(setup.cfg.clone(), setup.eval, setup.network.clone(), algs)?;
    Ok((ctx, setup))
}

fn io_diag(path: &Path, e: std::io::Error) -> Diagnostics {
    Diagnostics::single(Diagnostic::new(&path.display().to_string(), "", format!("cannot write: {e}")))
}

fn validate(files: &[PathBuf], common: &Common) -> Result<(), Diagnostics> {
    let mut all = Diagnostics::default();
    for f in files {
        all.extend(validate_file(f));
    }
    let overridden = common.overrides() != Overrides::default();
    if common.config.is_some() || overridden || files.is_empty() {
        if let Err(d) = common.setup() {
            all.extend(d);
        }
    }
    if all.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(all)
    }
}

fn discover(common: &Common, sources: &[String], horizon: Option<u32>, no_augment: bool, out: Option<&Path>) -> Result<(), Diagnostics> {
    let (ctx, _) = context(common, &[])?;
    let horizon = horizon.unwrap_or(ctx.horizon);
    let fail = |loc: &str, m: String| Diagnostics::single(Diagnostic::new("--source", loc, m));
    let ids = if sources.is_empty() {
        ctx.topologies.keys().copied().collect::<Vec<_>>()
    } else {
        sources
            .iter()
            .map(|s| ctx.net.node_id(s).ok_or_else(|| fail("", format!("unknown node '{s}'"))))
            .collect::<Result<_, _>>()?
    };
    let mut docs = Vec::new();
    for id in ids {
        let found = discover_topologies(&ctx.net, horizon, id).map_err(|e| fail("", e.to_string()))?;
        let (tops, report) = if no_augment {
            (found, Default::default())
        } else {
            augment_leftover_links(found, &ctx.net, horizon)
        };
        docs.push(TopologySetDoc::new(&ctx.net, ctx.net.name(id), horizon, &tops, &report));
    }
    let mut text = serde_json::to_string_pretty(&docs).expect("serializable");
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_diag(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn route(common: &Common, interval: u32, flag: &[String], out: &Path) -> Result<(), Diagnostics> {
    let (ctx, _) = context(common, flag)?;
    let (first, last) = ctx.cfg.interval_range;
    if interval < first || interval > last {
        return Err(Diagnostics::single(Diagnostic::new(
            "--interval",
            "",
            format!("interval {interval} is outside {first}..={last}"),
        )));
    }
    let iv = run_interval(&ctx, interval);
    write_tables(&ctx, std::slice::from_ref(&iv), out).map_err(|e| io_diag(out, e))?;
    let opt = out.join("optimal.json");
    write_optimal(&ctx, &iv, &opt).map_err(|e| io_diag(&opt, e))?;
    for e in &iv.errors {
        eprintln!("warning: interval {} {}: {}", e.interval, e.algorithm, e.message);
    }
    Ok(())
}

fn run_all(common: &Common, flag: &[String], out: Option<&Path>) -> Result<(), Diagnostics> {
    let (ctx, setup) = context(common, flag)?;
    let dir = out.map(Path::to_path_buf).or(setup.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let sweep = run_sweep(&ctx);
    write_run(&ctx, &sweep, &dir, setup.seed).map_err(|e| io_diag(&dir, e))?;
    let errors = sweep.errors().count();
    if errors > 0 {
        eprintln!("warning: {errors} error rows written to {}", dir.join("errors.csv").display());
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status: 0 on success, 1 on diagnostics, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Validate { files, common } => validate(files, common),
        Command::Discover {
            common,
            source,
            horizon,
            no_augment,
            out,
        } => discover(common, source, *horizon, *no_augment, out.as_deref()),
        Command::Route {
            common,
            interval,
            algorithms,
            out,
        } => route(common, *interval, algorithms, out),
        Command::Run { common, algorithms, out } => run_all(common, algorithms, out.as_deref()),
    };
    match result {
        Ok(()) => 0,
        Err(d) => {
            eprintln!("{d}");
            1
        }
    }
}
