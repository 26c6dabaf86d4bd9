use std::path::Path;
use std::process::{Command, Output};

fn gmnl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmnl"))
        .args(args)
        .env_remove("GMNL_VERTEX_CACHE")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bound_reports_exact_value_with_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bound.json");
    let o = gmnl(&["bound", "--ineq", "improved00", "--n", "3", "--mode", "bilocal", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["exact"], "0");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn oversized_requests_are_refused() {
    let o = gmnl(&["bound", "--ineq", "improved00", "--n", "8", "--mode", "bilocal"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "cap_exceeded");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(gmnl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(gmnl(&["bound", "--ineq", "star-depth", "--n", "3"]).status.code(), Some(2));
    let o = gmnl(&["evaluate", "--ineq", "improved00", "--behavior", "/nonexistent/b.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exported_behavior_violates_exported_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let (b, e, out) = (dir.path().join("b.json"), dir.path().join("e.json"), dir.path().join("r.json"));
    let p = |x: &Path| x.to_str().unwrap().to_string();
    assert!(gmnl(&["export", "--construction-seed", "4", "--out", &p(&b)]).status.success());
    assert!(gmnl(&["export", "--ineq", "improved00", "--n", "3", "--out", &p(&e)]).status.success());
    let o = gmnl(&["evaluate", "--expr", &p(&e), "--behavior", &p(&b), "--out", &p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out);
    assert!(v["result"]["margin"].as_f64().unwrap() > 0.0);
    assert_eq!(v["result"]["violated"], true);
}

#[test]
fn mismatched_behavior_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    assert!(gmnl(&["export", "--construction-seed", "1", "--out", b.to_str().unwrap()]).status.success());
    let o = gmnl(&["evaluate", "--ineq", "improved00", "--n", "4", "--behavior", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = gmnl(&["thm2", "--count", "50", "--seed", "9", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    let first = run("a.json");
    let second = run("b.json");
    let strip = |bytes: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
        v["command"] = serde_json::Value::Null;
        v["config_digest"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&first), strip(&second));
    let again = dir.path().join("a.json");
    let o = gmnl(&["thm2", "--count", "50", "--seed", "9", "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(again).unwrap(), first);
}

#[test]
fn vertex_cache_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let o = gmnl(&["vertices", "--d", "2", "--regenerate", "--vertex-cache", cache]);
    assert!(o.status.success());
    assert!(dir.path().join("ns_vertices_2x2x2.json").exists());
    let o = gmnl(&["vertices", "--d", "2", "--vertex-cache", cache]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["count"], 24);
    assert_eq!(gmnl(&["vertices", "--d", "4"]).status.code(), Some(2));
}
