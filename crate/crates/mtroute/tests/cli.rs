use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mtroute::formats::NetworkDoc;
use mtroute_core::scenario::{build_reference_network, ScenarioConfig};

fn mtroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtroute")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn validate_accepts_defaults_and_shipped_configs() {
    let o = mtroute(&["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");

    let dir = configs();
    let files: Vec<String> = ["reference_network.json", "scenario.json", "manifest.json"]
        .iter()
        .map(|f| dir.join(f).display().to_string())
        .collect();
    let mut args = vec!["validate"];
    args.extend(files.iter().map(String::as_str));
    let o = mtroute(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn shipped_network_is_the_reference_network() {
    let text = fs::read_to_string(configs().join("reference_network.json")).unwrap();
    let doc: NetworkDoc = serde_json::from_str(&text).unwrap();
    let built = build_reference_network(&ScenarioConfig::default()).unwrap();
    assert_eq!(doc.to_network().unwrap(), built);
}

#[test]
fn negative_capacity_is_reported_with_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("net.json");
    fs::write(
        &path,
        r#"{
  "nodes": [{"id": "a", "kind": "router"}, {"id": "b", "kind": "router"}],
  "links": [
    {"src": "a", "dst": "b", "capacity_mbps": 10, "delay_ms": 1},
    {"src": "b", "dst": "a", "capacity_mbps": -5, "delay_ms": 1}
  ]
}
"#,
    )
    .unwrap();
    let o = mtroute(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains(":5:"), "{err}");
    assert!(err.contains("links[1].capacity_mbps"), "{err}");
}

#[test]
fn profile_off_by_two_percent_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("profile.txt");
    let weights: Vec<String> = (0..48).map(|_| format!("{}", 0.98 / 48.0)).collect();
    fs::write(&path, weights.join("\n")).unwrap();
    let o = mtroute(&["validate", "--profile", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("diurnal_profile"), "{err}");
    assert!(err.contains("1e-9"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(mtroute(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(mtroute(&["route"]).status.code(), Some(2));
}

#[test]
fn route_writes_one_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = mtroute(&["route", "--interval", "42", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = csv_rows(&out.join("report.csv"));
    assert_eq!(report.len(), 5);
    assert!(report.iter().all(|r| r[0] == "42"));
    let opt: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("optimal.json")).unwrap()).unwrap();
    assert_eq!(opt["objective"], "residual_ratio");
    assert!(opt["z_star"].as_f64().unwrap() > 0.0);

    let o = mtroute(&["route", "--interval", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("outside 16..=48"));
}

#[test]
fn discover_emits_disjoint_topology_sets() {
    let o = mtroute(&["discover", "--source", "PGW", "--no-augment"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sets: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sets = sets.as_array().unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0]["source"], "PGW");
    assert_eq!(sets[0]["D"], 11);
    let tops = sets[0]["topologies"].as_array().unwrap();
    assert!(tops.len() >= 2);
    let mut seen = std::collections::BTreeSet::new();
    for t in tops {
        for l in t["links"].as_array().unwrap() {
            assert!(seen.insert(l.to_string()), "link {l} in two topologies");
        }
    }

    let o = mtroute(&["discover", "--source", "nowhere"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn optimal_alone_has_unit_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = mtroute(&["run", "--algorithms", "Optimal", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("report.csv"));
    assert_eq!(rows.len(), 33);
    assert!(rows.iter().all(|r| r[1] == "Optimal" && r[4] == "1.000000"));
}

#[test]
fn default_run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = mtroute(&["run", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in mtroute::output::RUN_FILES {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let rows = csv_rows(&out.join("report.csv"));
    assert_eq!(rows.len(), 33 * 5);
    assert_eq!(csv_rows(&out.join("errors.csv")).len(), 0);
    let header = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(header.starts_with("interval,algorithm,mrc,mlu,perf_ratio,mos_min,mos_max,rejections\n"));
}

#[test]
fn tight_bound_rejects_with_sla_status() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = mtroute(&[
        "route",
        "--interval",
        "20",
        "--algorithms",
        "MDelay-40",
        "--d-nonrealtime-ms",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("selection_trace.csv"));
    let rejected: Vec<_> = rows.iter().filter(|r| r[5] == "non_realtime" && r[8].is_empty()).collect();
    assert!(!rejected.is_empty());
    for r in &rejected {
        assert_eq!(r[10], mtroute_core::flow::SLA_REJECTION);
    }
    for r in rows.iter().filter(|r| r[10] == "selected") {
        let g: f64 = r[9].parse().unwrap();
        assert!(g > 0.0 && g <= 1.0);
    }
    let report = csv_rows(&out.join("report.csv"));
    let count: usize = report.iter().find(|r| r[1] == "MDelay-40").unwrap()[7].parse().unwrap();
    assert_eq!(count, rejected.len());
}
