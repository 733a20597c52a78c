//! Resolves command-line inputs into a validated scenario, network and run
//! settings.

use std::fs;
use std::path::{Path, PathBuf};

use mtroute_core::graph::Network;
use mtroute_core::scenario::{build_reference_network, Issue, ScenarioConfig};

use crate::diag::{Diagnostic, Diagnostics};
use crate::formats::{
    anchor_issues, parse_config, resolve_relative, ConfigFile, Evaluation, ManifestDoc, ProfileSpec,
    ScenarioDoc,
};

/// Values given as flags; each replaces the scenario's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub realtime_share: Option<f64>,
    pub d_realtime_ms: Option<u32>,
    pub d_nonrealtime_ms: Option<u32>,
    /// `default`, `flat`, or a file of 48 weights (JSON array or
    /// whitespace/comma separated).
    pub profile: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Setup {
    pub cfg: ScenarioConfig,
    pub eval: Evaluation,
    pub network: Network,
    /// Algorithm names from the manifest, unparsed.
    pub algorithms: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn read(path: &Path) -> Result<String, Diagnostics> {
    fs::read_to_string(path)
        .map_err(|e| Diagnostics::single(Diagnostic::new(&path.display().to_string(), "", format!("cannot read: {e}"))))
}

fn load_profile(spec: &str) -> Result<Vec<f64>, Diagnostics> {
    if spec == "default" || spec == "flat" {
        return ProfileSpec::Named(spec.to_string())
            .resolve()
            .map_err(|m| Diagnostics::single(Diagnostic::new("--profile", "", m)));
    }
    let path = Path::new(spec);
    let text = read(path)?;
    let file = path.display().to_string();
    if text.trim_start().starts_with('[') {
        return serde_json::from_str::<Vec<f64>>(&text).map_err(|e| {
            Diagnostics::single(Diagnostic {
                file,
                line: Some(e.line()),
                column: Some(e.column()),
                location: String::new(),
                message: "expected a JSON array of numbers".to_string(),
            })
        });
    }
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            match tok.parse::<f64>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    return Err(Diagnostics::single(Diagnostic {
                        file,
                        line: Some(ln + 1),
                        column: None,
                        location: format!("diurnal_profile[{}]", out.len()),
                        message: format!("'{tok}' is not a number"),
                    }))
                }
            }
        }
    }
    Ok(out)
}

/// Every name the scenario refers to must exist in a user-supplied network.
fn check_names(cfg: &ScenarioConfig, net: &Network) -> Vec<Issue> {
    let mut out = Vec::new();
    let mut need = |loc: String, name: &str| {
        if net.node_id(name).is_none() {
            out.push(Issue {
                location: loc,
                message: format!("node '{name}' is not in the network"),
            });
        }
    };
    need("gateway".into(), &cfg.gateway);
    need("central_anchor".into(), &cfg.central_anchor);
    for (i, c) in cfg.cells.iter().enumerate() {
        need(format!("cells[{i}].enb"), &c.enb);
        for (j, r) in c.relays.iter().enumerate() {
            need(format!("cells[{i}].relays[{j}]"), r);
        }
    }
    out
}

/// Loads `config` (a manifest or a scenario file; defaults when `None`),
/// applies `ov`, and validates the result.
pub fn load(config: Option<&Path>, ov: &Overrides) -> Result<Setup, Diagnostics> {
    let mut manifest = ManifestDoc::default();
    let mut scenario = ScenarioDoc::default();
    let mut scenario_file: Option<(PathBuf, String)> = None;
    if let Some(path) = config {
        let text = read(path)?;
        match parse_config(&path.display().to_string(), &text)? {
            ConfigFile::Manifest(m) => {
                if let Some(c) = &m.config {
                    let sp = resolve_relative(path, c);
                    let st = read(&sp)?;
                    match parse_config(&sp.display().to_string(), &st)? {
                        ConfigFile::Scenario(s) => scenario = s,
                        _ => {
                            return Err(Diagnostics::single(Diagnostic::new(
                                &sp.display().to_string(),
                                "",
                                "expected a scenario file",
                            )))
                        }
                    }
                    scenario_file = Some((sp, st));
                }
                manifest = m;
                if let Some(o) = &manifest.out {
                    manifest.out = Some(resolve_relative(path, o).display().to_string());
                }
            }
            ConfigFile::Scenario(s) => {
                scenario = s;
                scenario_file = Some((path.to_path_buf(), text));
            }
            ConfigFile::Network(_) => {
                return Err(Diagnostics::single(Diagnostic::new(
                    &path.display().to_string(),
                    "",
                    "this is a network file; reference it from a scenario's \"network\" field",
                )))
            }
        }
    }
    let (sfile, stext) = match &scenario_file {
        Some((p, t)) => (p.display().to_string(), Some(t.as_str())),
        None => ("<defaults>".to_string(), None),
    };
    let (mut cfg, eval) = scenario.resolve().map_err(|i| anchor_issues(&sfile, stext, i))?;
    if let Some(v) = ov.realtime_share {
        cfg.realtime_share = v;
    }
    if let Some(v) = ov.d_realtime_ms {
        cfg.d_realtime_ms = v;
    }
    if let Some(v) = ov.d_nonrealtime_ms {
        cfg.d_nonrealtime_ms = v;
    }
    if let Some(p) = &ov.profile {
        cfg.diurnal_profile = load_profile(p)?;
    }
    let issues = cfg.validate();
    if !issues.is_empty() {
        return Err(anchor_issues(&sfile, stext, issues));
    }
    let network = match (&scenario.network, &scenario_file) {
        (Some(n), Some((sp, _))) => {
            let np = resolve_relative(sp, n);
            let ntext = read(&np)?;
            let nfile = np.display().to_string();
            let doc = match parse_config(&nfile, &ntext)? {
                ConfigFile::Network(d) => d,
                _ => return Err(Diagnostics::single(Diagnostic::new(&nfile, "", "expected a network file"))),
            };
            let net = doc.to_network().map_err(|i| anchor_issues(&nfile, Some(&ntext), i))?;
            let missing = check_names(&cfg, &net);
            if !missing.is_empty() {
                return Err(anchor_issues(&sfile, stext, missing));
            }
            net
        }
        _ => build_reference_network(&cfg)
            .map_err(|e| Diagnostics::single(Diagnostic::new(&sfile, "", e.to_string())))?,
    };
    Ok(Setup {
        cfg,
        eval,
        network,
        algorithms: manifest.algorithms,
        out: manifest.out.map(PathBuf::from),
        seed: manifest.seed,
    })
}

/// Checks one file of any kind. Scenario and manifest files are checked
/// together with the files they reference.
pub fn validate_file(path: &Path) -> Diagnostics {
    let text = match read(path) {
        Ok(t) => t,
        Err(d) => return d,
    };
    let file = path.display().to_string();
    match parse_config(&file, &text) {
        Err(d) => d,
        Ok(ConfigFile::Network(doc)) => anchor_issues(&file, Some(&text), doc.validate()),
        Ok(ConfigFile::Manifest(m)) => {
            let mut d = match load(Some(path), &Overrides::default()) {
                Ok(_) => Diagnostics::default(),
                Err(d) => d,
            };
            if let Some(algs) = &m.algorithms {
                d.extend(crate::experiment::check_algorithm_names(&file, Some(&text), algs));
            }
            d
        }
        Ok(ConfigFile::Scenario(_)) => match load(Some(path), &Overrides::default()) {
            Ok(_) => Diagnostics::default(),
            Err(d) => d,
        },
    }
}
