//! JSON documents read and written by the tools: networks, scenarios, run
//! manifests, topology sets and optimal solutions.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Number;

use mtroute_core::baselines::OptimalSolution;
use mtroute_core::graph::{LinkId, Network, NodeKind};
use mtroute_core::qoe::MosModel;
use mtroute_core::scenario::{default_profile, flat_profile, CellConfig, Issue, ScenarioConfig};
use mtroute_core::topologies::{AugmentationReport, LogicalTopology};

use crate::diag::{Diagnostic, Diagnostics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub nodes: Vec<NodeDoc>,
    pub links: Vec<LinkDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub src: String,
    pub dst: String,
    pub capacity_mbps: f64,
    /// Kept as a raw number so fractional delays are reported, not truncated.
    pub delay_ms: Number,
}

fn issue(location: impl Into<String>, message: impl Into<String>) -> Issue {
    Issue {
        location: location.into(),
        message: message.into(),
    }
}

/// Positive integer value of `n`, if it is one.
fn positive_int(n: &Number) -> Option<u32> {
    if let Some(v) = n.as_u64() {
        return u32::try_from(v).ok().filter(|&v| v > 0);
    }
    let f = n.as_f64()?;
    (f.fract() == 0.0 && f >= 1.0 && f <= f64::from(u32::MAX)).then_some(f as u32)
}

impl NetworkDoc {
    pub fn validate(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id.is_empty() {
                out.push(issue(format!("nodes[{i}].id"), "must not be empty"));
            } else if !ids.insert(n.id.as_str()) {
                out.push(issue(format!("nodes[{i}].id"), format!("duplicate node id '{}'", n.id)));
            }
            if NodeKind::parse(&n.kind).is_none() {
                out.push(issue(
                    format!("nodes[{i}].kind"),
                    format!("unknown kind '{}', expected router, gateway, eNB or relay", n.kind),
                ));
            }
        }
        let mut pairs = BTreeSet::new();
        for (i, l) in self.links.iter().enumerate() {
            for (field, id) in [("src", &l.src), ("dst", &l.dst)] {
                if !ids.contains(id.as_str()) {
                    out.push(issue(format!("links[{i}].{field}"), format!("unknown node '{id}'")));
                }
            }
            if l.src == l.dst {
                out.push(issue(format!("links[{i}]"), format!("self-loop at '{}'", l.src)));
            } else if !pairs.insert((l.src.as_str(), l.dst.as_str())) {
                out.push(issue(format!("links[{i}]"), format!("duplicate link {}->{}", l.src, l.dst)));
            }
            if !(l.capacity_mbps.is_finite() && l.capacity_mbps > 0.0) {
                out.push(issue(
                    format!("links[{i}].capacity_mbps"),
                    format!("capacity must be positive, got {}", l.capacity_mbps),
                ));
            }
            if positive_int(&l.delay_ms).is_none() {
                out.push(issue(
                    format!("links[{i}].delay_ms"),
                    format!("delay must be a positive integer, got {}", l.delay_ms),
                ));
            }
        }
        out
    }

    pub fn to_network(&self) -> Result<Network, Vec<Issue>> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(issues);
        }
        let mut b = Network::builder();
        for n in &self.nodes {
            b.node(n.id.as_str(), NodeKind::parse(&n.kind).expect("validated"));
        }
        for l in &self.links {
            b.link(l.src.as_str(), l.dst.as_str(), l.capacity_mbps, positive_int(&l.delay_ms).expect("validated"));
        }
        b.build().map_err(|e| vec![issue("", e.to_string())])
    }

    pub fn from_network(net: &Network) -> Self {
        NetworkDoc {
            nodes: net
                .nodes()
                .map(|(_, n)| NodeDoc {
                    id: n.name.clone(),
                    kind: n.kind.as_str().to_string(),
                })
                .collect(),
            links: net
                .links()
                .map(|(_, l)| LinkDoc {
                    src: net.name(l.src).to_string(),
                    dst: net.name(l.dst).to_string(),
                    capacity_mbps: l.capacity_mbps,
                    delay_ms: Number::from(l.delay_ms),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDoc {
    pub enb: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_router: Option<String>,
    #[serde(default)]
    pub relays: Vec<String>,
    pub users: u32,
}

/// `"default"`, `"flat"`, or 48 explicit weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Named(String),
    Weights(Vec<f64>),
}

impl ProfileSpec {
    pub fn resolve(&self) -> Result<Vec<f64>, String> {
        match self {
            ProfileSpec::Named(n) if n == "default" => Ok(default_profile()),
            ProfileSpec::Named(n) if n == "flat" => Ok(flat_profile()),
            ProfileSpec::Named(n) => Err(format!("unknown profile '{n}', expected \"default\", \"flat\" or a weight list")),
            ProfileSpec::Weights(w) => Ok(w.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MosDoc {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// How MOS is evaluated from path headroom.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationDoc {
    /// Simultaneous realtime flows sharing a path in the per-interval report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_flows: Option<u32>,
    /// `[first, last, step]` flow counts for the MOS-vs-flows series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_sweep: Option<[u32; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mos: Option<MosDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub n_flows: u32,
    pub flow_sweep: (u32, u32, u32),
    pub mos: MosModel,
}

impl Default for Evaluation {
    fn default() -> Self {
        Evaluation {
            n_flows: 500,
            flow_sweep: (100, 3000, 100),
            mos: MosModel::default(),
        }
    }
}

/// Scenario file. Every field is optional and falls back to the reference
/// scenario; `network` names a network file relative to this one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_anchor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backhaul_capacity_mbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wireless_capacity_mbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_delay_ms: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_user_daily_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uplink_fraction_of_downlink: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_share: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realtime_share: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diurnal_profile: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_range: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_minutes: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_realtime_ms: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_nonrealtime_ms: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationDoc>,
}

impl ScenarioDoc {
    /// Merges onto the defaults. Type-level problems (fractional delays,
    /// unknown profile names) come back as issues; range checks are left to
    /// [`ScenarioConfig::validate`].
    pub fn resolve(&self) -> Result<(ScenarioConfig, Evaluation), Vec<Issue>> {
        let mut cfg = ScenarioConfig::default();
        let mut issues = Vec::new();
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            };
        }
        take!(gateway);
        take!(central_anchor);
        take!(backhaul_capacity_mbps);
        take!(wireless_capacity_mbps);
        take!(per_user_daily_mb);
        take!(uplink_fraction_of_downlink);
        take!(direct_share);
        take!(realtime_share);
        take!(interval_minutes);
        for (name, src, dst) in [
            ("link_delay_ms", &self.link_delay_ms, &mut cfg.link_delay_ms),
            ("d_realtime_ms", &self.d_realtime_ms, &mut cfg.d_realtime_ms),
            ("d_nonrealtime_ms", &self.d_nonrealtime_ms, &mut cfg.d_nonrealtime_ms),
        ] {
            if let Some(n) = src {
                match positive_int(n) {
                    Some(v) => *dst = v,
                    None => issues.push(issue(name, format!("must be a positive integer, got {n}"))),
                }
            }
        }
        if let Some(cells) = &self.cells {
            cfg.cells = cells
                .iter()
                .enumerate()
                .map(|(i, c)| CellConfig {
                    enb: c.enb.clone(),
                    access_router: c.access_router.clone().unwrap_or_else(|| format!("R{}", i + 1)),
                    relays: c.relays.clone(),
                    users: c.users,
                })
                .collect();
        }
        if let Some(p) = &self.diurnal_profile {
            match p.resolve() {
                Ok(w) => cfg.diurnal_profile = w,
                Err(m) => issues.push(issue("diurnal_profile", m)),
            }
        }
        if let Some([a, b]) = self.interval_range {
            cfg.interval_range = (a, b);
        }
        let mut eval = Evaluation::default();
        if let Some(e) = &self.evaluation {
            if let Some(n) = e.n_flows {
                eval.n_flows = n;
            }
            if let Some([a, b, s]) = e.flow_sweep {
                eval.flow_sweep = (a, b, s);
            }
            if let Some(m) = &e.mos {
                eval.mos = MosModel {
                    alpha: m.alpha,
                    beta: m.beta,
                    gamma: m.gamma,
                };
            }
        }
        issues.extend(validate_evaluation(&eval));
        if issues.is_empty() {
            Ok((cfg, eval))
        } else {
            Err(issues)
        }
    }
}

pub fn validate_evaluation(eval: &Evaluation) -> Vec<Issue> {
    let mut out = Vec::new();
    if eval.n_flows == 0 {
        out.push(issue("evaluation.n_flows", "must be at least 1"));
    }
    let (a, b, s) = eval.flow_sweep;
    if a == 0 || s == 0 || a > b {
        out.push(issue("evaluation.flow_sweep", "must be [first, last, step] with 1 <= first <= last and step >= 1"));
    }
    let m = eval.mos;
    if ![m.alpha, m.beta, m.gamma].iter().all(|v| v.is_finite()) || m.gamma <= 0.0 {
        out.push(issue("evaluation.mos", "coefficients must be finite with gamma > 0"));
    }
    out
}

/// Run manifest: which scenario, which algorithms, where to write.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    /// Scenario file relative to the manifest; defaults apply when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Accepted for reproducibility records; no step of a run is random.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

const MANIFEST_KEYS: [&str; 4] = ["config", "algorithms", "out", "seed"];

/// A file given on the command line, parsed and classified.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigFile {
    Manifest(ManifestDoc),
    Scenario(ScenarioDoc),
    Network(NetworkDoc),
}

/// Parses `text`, classifying it by its top-level keys. Syntax and type
/// errors are anchored to a line and column.
pub fn parse_config(file: &str, text: &str) -> Result<ConfigFile, Diagnostics> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Diagnostics::single(syntax(file, &e)))?;
    let Some(obj) = value.as_object() else {
        return Err(Diagnostics::single(Diagnostic::new(file, "", "top level must be a JSON object")));
    };
    let parsed = if obj.contains_key("nodes") || obj.contains_key("links") {
        serde_json::from_str(text).map(ConfigFile::Network)
    } else if obj.keys().any(|k| MANIFEST_KEYS.contains(&k.as_str())) {
        serde_json::from_str(text).map(ConfigFile::Manifest)
    } else {
        serde_json::from_str(text).map(ConfigFile::Scenario)
    };
    parsed.map_err(|e| Diagnostics::single(syntax(file, &e)))
}

fn syntax(file: &str, e: &serde_json::Error) -> Diagnostic {
    let mut msg = e.to_string();
    // serde_json appends " at line L column C"; the diagnostic carries those.
    if let Some(cut) = msg.rfind(" at line ") {
        msg.truncate(cut);
    }
    Diagnostic {
        file: file.to_string(),
        line: Some(e.line()),
        column: Some(e.column()),
        location: String::new(),
        message: msg,
    }
}

/// Turns core issues into diagnostics, anchoring each to the line of the
/// offending value in `text`.
pub fn anchor_issues(file: &str, text: Option<&str>, issues: Vec<Issue>) -> Diagnostics {
    let spans = text.map(crate::diag::value_positions).unwrap_or_default();
    Diagnostics(
        issues
            .into_iter()
            .map(|i| {
                let pos = crate::diag::nearest(&spans, &i.location);
                Diagnostic {
                    file: file.to_string(),
                    line: pos.map(|p| p.0),
                    column: pos.map(|p| p.1),
                    location: i.location,
                    message: i.message,
                }
            })
            .collect(),
    )
}

pub fn resolve_relative(base_file: &FsPath, target: &str) -> PathBuf {
    let t = FsPath::new(target);
    if t.is_absolute() {
        t.to_path_buf()
    } else {
        base_file.parent().unwrap_or(FsPath::new(".")).join(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkRef {
    pub src: String,
    pub dst: String,
}

impl LinkRef {
    pub fn of(net: &Network, id: LinkId) -> Self {
        let l = net.link(id);
        LinkRef {
            src: net.name(l.src).to_string(),
            dst: net.name(l.dst).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub k: usize,
    pub links: Vec<LinkRef>,
    /// Destination id to the links of its stored path.
    pub paths: BTreeMap<String, Vec<LinkRef>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddedLinkDoc {
    pub src: String,
    pub dst: String,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySetDoc {
    pub source: String,
    #[serde(rename = "D")]
    pub horizon: u32,
    pub topologies: Vec<TopologyDoc>,
    pub added_links: Vec<AddedLinkDoc>,
    pub unassigned_links: Vec<LinkRef>,
}

impl TopologySetDoc {
    pub fn new(
        net: &Network,
        source: &str,
        horizon: u32,
        topologies: &[LogicalTopology],
        report: &AugmentationReport,
    ) -> Self {
        TopologySetDoc {
            source: source.to_string(),
            horizon,
            topologies: topologies
                .iter()
                .map(|t| TopologyDoc {
                    k: t.index(),
                    links: t.links().iter().map(|&l| LinkRef::of(net, l)).collect(),
                    paths: t
                        .paths()
                        .iter()
                        .map(|(d, p)| (net.name(*d).to_string(), p.links().iter().map(|&l| LinkRef::of(net, l)).collect()))
                        .collect(),
                })
                .collect(),
            added_links: report
                .added
                .iter()
                .map(|&(l, k)| {
                    let r = LinkRef::of(net, l);
                    AddedLinkDoc { src: r.src, dst: r.dst, k }
                })
                .collect(),
            unassigned_links: report.unassigned.iter().map(|&l| LinkRef::of(net, l)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkLoadDoc {
    pub src: String,
    pub dst: String,
    pub capacity_mbps: f64,
    pub f_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDoc {
    pub nodes: Vec<String>,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkFractionDoc {
    pub src: String,
    pub dst: String,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommodityDoc {
    pub origin: String,
    pub destination: String,
    pub volume_mbps: f64,
    pub paths: Vec<SplitDoc>,
    /// Links with a non-zero fraction only.
    pub link_fractions: Vec<LinkFractionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalDoc {
    pub objective: String,
    pub z_star: f64,
    pub loads: Vec<LinkLoadDoc>,
    pub commodities: Vec<CommodityDoc>,
}

impl OptimalDoc {
    pub fn new(net: &Network, sol: &OptimalSolution) -> Self {
        OptimalDoc {
            objective: sol.objective.as_str().to_string(),
            z_star: sol.z_star,
            loads: net
                .links()
                .map(|(id, l)| LinkLoadDoc {
                    src: net.name(l.src).to_string(),
                    dst: net.name(l.dst).to_string(),
                    capacity_mbps: l.capacity_mbps,
                    f_mbps: sol.loads.get(id),
                })
                .collect(),
            commodities: sol
                .commodities
                .iter()
                .map(|c| CommodityDoc {
                    origin: net.name(c.origin).to_string(),
                    destination: net.name(c.destination).to_string(),
                    volume_mbps: c.volume_mbps,
                    paths: c
                        .paths
                        .iter()
                        .map(|(p, f)| SplitDoc {
                            nodes: p.nodes().iter().map(|&n| net.name(n).to_string()).collect(),
                            fraction: *f,
                        })
                        .collect(),
                    link_fractions: c
                        .link_fractions
                        .iter()
                        .enumerate()
                        .filter(|(_, &x)| x > 0.0)
                        .map(|(i, &x)| {
                            let r = LinkRef::of(net, LinkId(i));
                            LinkFractionDoc { src: r.src, dst: r.dst, x }
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}
