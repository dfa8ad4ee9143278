use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexgeom")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn build(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut all = vec!["--out", &path, "build"];
    all.extend_from_slice(args);
    let o = run(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn hexagon_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build(dir.path(), "h2.json", &["hexagon", "--q", "2"]);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&h2).unwrap()).unwrap();
    assert_eq!(file["points"], 63);

    let o = run(&["relations", "--geometry", &h2, "--census"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["census"]["opposite"], 1008);

    let o = run(&["search", "blocking", "--geometry", &h2, "--k", "3", "--classify"]);
    assert_eq!(o.status.code(), Some(0));
    let sets = json(&o)["sets"].as_array().unwrap().clone();
    assert_eq!(sets.len(), 651);
    assert!(sets.iter().all(|s| s["class"].as_str() != Some("unclassified")));

    let o = run(&["search", "rut", "--geometry", &h2]);
    assert_eq!(json(&o)["count"], 651);

    let o = run(&["check", "dominating", "--geometry", &h2, "--points", "0,1,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["dominating"], false);
}

#[test]
fn grassmannian_positions() {
    let dir = tempfile::tempdir().unwrap();
    let w = build(dir.path(), "w.json", &["--grassmannian", "polar", "--family", "symplectic", "--dim", "5", "--q", "2"]);
    let o = run(&["positions", "--geometry", &w, "--comb", "0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let trace: Vec<&str> = v["positions"].as_array().unwrap().iter().map(|p| p.as_str().unwrap()).collect();
    assert_eq!(trace, ["0110", "0112", "1223", "2332"]);
    let o = run(&["positions", "--geometry", &w, "--pair", "3", "3"]);
    assert_eq!(json(&o)["position"], "0110");
}

#[test]
fn orders_and_nonexistence() {
    let o = run(&["fh", "--s", "2", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["feasible"], true);
    let o = run(&["fh", "--s", "240", "--t", "15"]);
    assert_eq!(json(&o)["failed"], "minus_integral");
    let o = run(&["verify", "nonex", "--tmax", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn budget_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build(dir.path(), "h2.json", &["hexagon", "--q", "2"]);
    let o = run(&["--budget", "5", "search", "blocking", "--geometry", &h2, "--k", "3"]);
    assert_eq!(o.status.code(), Some(3));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["relations", "--geometry", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\":").unwrap();
    assert_eq!(run(&["relations", "--geometry", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["check", "dominating", "--geometry", &h2, "--points", "0,x"]).status.code(), Some(2));
    assert_eq!(run(&["build", "hexagon", "--q", "6"]).status.code(), Some(2));
}
