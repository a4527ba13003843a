use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn geomech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geomech")).args(args).env_remove("GEOMECH_SEED").output().expect("binary runs")
}

fn lines(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("JSONL")).collect()
}

fn check(spec: &str, extra: &[&str]) -> Output {
    let path = fixture(spec);
    let mut args = vec!["check", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    geomech(&args)
}

#[test]
fn free_particle_passes_and_prints_field() {
    let out = check("free_particle.spec", &[]);
    assert_eq!(out.status.code(), Some(0));
    let recs = lines(&out);
    assert_eq!(recs.len(), 4);
    assert_eq!(recs[0]["samples"], 16);
    assert_eq!(recs[1]["id"], "el-solve");
    assert_eq!(recs[1]["detail"], "(v) ∂q");
    assert!(recs[1..].iter().all(|r| r["status"] == "pass"));
}

#[test]
fn coordinate_examples_pass_transport() {
    for (spec, field) in [
        ("scaled_position.spec", "(w) ∂y"),
        ("rescaled_oscillator.spec", "(w) ∂y + (-y*omega^2) ∂w"),
        ("exponential_shift.spec", "(w) ∂y + (w) ∂w"),
    ] {
        let out = check(spec, &["--only", "sode-transport"]);
        assert_eq!(out.status.code(), Some(0), "{spec}");
        let recs = lines(&out);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1]["status"], "pass");
        assert_eq!(recs[1]["detail"], field);
    }
}

#[test]
fn bad_bivector_fails_with_witness() {
    let out = check("bad_bivector.spec", &["--only", "jacobi"]);
    assert_eq!(out.status.code(), Some(1));
    let rec = &lines(&out)[1];
    assert_eq!(rec["status"], "fail");
    let w = rec["witness"].as_object().unwrap();
    assert!(["x", "y", "z"].iter().all(|c| w.contains_key(*c)));
}

#[test]
fn reports_are_deterministic() {
    let a = check("scaled_position.spec", &["--seed", "42"]);
    let b = check("scaled_position.spec", &["--seed", "42"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(lines(&a)[0]["seed"], 42);
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    let c = check("scaled_position.spec", &["--seed", "42", "--report", report.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&report).unwrap(), a.stdout);
}

#[test]
fn environment_seed_overrides_flag() {
    let path = fixture("free_particle.spec");
    let out = Command::new(env!("CARGO_BIN_EXE_geomech"))
        .args(["check", path.to_str().unwrap(), "--seed", "1"])
        .env("GEOMECH_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(lines(&out)[0]["seed"], 99);
}

#[test]
fn timings_are_opt_in() {
    let plain = lines(&check("free_particle.spec", &[]));
    assert!(plain[1].get("wall_ms").is_none());
    let timed = lines(&check("free_particle.spec", &["--timings"]));
    assert!(timed[1]["wall_ms"].as_f64().is_some());
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(check("free_particle.spec", &["--only", "nope"]).status.code(), Some(2));
    assert_eq!(check("missing.spec", &[]).status.code(), Some(2));
    assert_eq!(geomech(&["check"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.spec");
    std::fs::write(&bad, "[chart \"tq\"]\ncoords = \"q, v\"\n[lagrangian \"l\"]\nchart = \"tq\"\nexpr = \"v^^2\"\n").unwrap();
    let out = geomech(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("5:"));
    std::fs::write(&bad, "[check \"c\"]\nkind = \"sode\"\nfield = \"g\"\nstructure = \"s\"\n").unwrap();
    let out = geomech(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unresolved reference"));
}
