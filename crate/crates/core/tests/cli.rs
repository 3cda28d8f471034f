use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nullcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullcode")).args(args).output().expect("spawn nullcode")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn preset_record() {
    let out = nullcode(&["code", "preset", "--t", "2"]);
    assert!(out.status.success());
    let r = records(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0]["command"], "code preset");
    let res = &r[0]["result"];
    assert_eq!((res["N"].as_u64(), res["n"].as_u64(), res["m"].as_u64(), res["q"].as_u64()), (Some(15), Some(3), Some(5), Some(16)));
}

#[test]
fn instance_gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let out = nullcode(&["instance", "gen", "--t", "2", "--p", "1/8", "--seed", seed, "--out", path_str(&path)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(path).unwrap()
    };
    let a = gen("a.json", "5");
    let b = gen("b.json", "5");
    let c = gen("c.json", "6");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn trials_are_seeded_in_order() {
    let out = nullcode(&["qsim", "alg1", "--toy", "self-dual-8-4", "--trials", "3", "--seed", "10"]);
    assert!(out.status.success());
    let r = records(&out);
    let seeds: Vec<u64> = r.iter().map(|v| v["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, vec![10, 11, 12]);
    let again = records(&nullcode(&["qsim", "alg1", "--toy", "self-dual-8-4", "--trials", "3", "--seed", "10"]));
    assert_eq!(r, again);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(nullcode(&["code", "preset", "--bogus"]).status.code(), Some(2));
    assert_eq!(nullcode(&["code", "dual", "--t", "2", "--toy", "self-dual-8-4"]).status.code(), Some(2));
    assert_eq!(nullcode(&["code", "dual"]).status.code(), Some(2));
}

#[test]
fn library_errors_exit_1() {
    let out = nullcode(&["instance", "verify", "--file", "/nonexistent/instance.json", "--word", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn verify_accepts_zero_word_on_zero_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i.json");
    let gen = nullcode(&["instance", "gen", "--toy", "self-dual-8-4", "--p", "0", "--out", path_str(&path)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let ok = nullcode(&["instance", "verify", "--file", path_str(&path), "--word", "0,0,0,0,0,0,0,0"]);
    assert!(ok.status.success());
    assert_eq!(records(&ok)[0]["result"]["valid"], true);
    let bad = nullcode(&["instance", "verify", "--file", path_str(&path), "--word", "1,0,0,0,0,0,0,0"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(records(&bad)[0]["result"]["in_code"], false);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"t": 3, "seed": 4}"#).unwrap();
    let out = nullcode(&["code", "preset", "--config", path_str(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = records(&out);
    assert_eq!(r[0]["seed"], 4);
    assert_eq!(r[0]["result"]["n"], 7);
    let explicit = records(&nullcode(&["code", "preset", "--t", "2", "--config", path_str(&cfg)]));
    assert_eq!(explicit[0]["result"]["n"], 3);
}

#[test]
fn report_on_empty_glob() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = dir.path().join("*.jsonl");
    let out = nullcode(&["report", "--glob", path_str(&pattern)]);
    assert!(out.status.success());
}

#[test]
fn report_summarizes_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.jsonl");
    let out = nullcode(&["qsim", "claim66", "--s", "2", "--sigma", "4", "--p", "1/4", "--out", path_str(&run)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report_dir = dir.path().join("report");
    let pattern = dir.path().join("*.jsonl");
    let rep = nullcode(&["report", "--glob", path_str(&pattern), "--out", path_str(&report_dir)]);
    assert!(rep.status.success(), "{}", String::from_utf8_lossy(&rep.stderr));
    let summary = std::fs::read_to_string(report_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("command,field,count,mean,std,min,max"));
    assert!(summary.contains("qsim claim66,mean,1,0.75"));
    assert!(report_dir.join("claim66-table.csv").exists());
}

#[test]
fn report_rejects_mixed_schema() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("a.jsonl"),
        "{\"command\":\"x\",\"result\":{\"a\":1}}\n{\"command\":\"x\",\"result\":{\"b\":2}}\n",
    )
    .unwrap();
    let pattern = dir.path().join("*.jsonl");
    let out = nullcode(&["report", "--glob", path_str(&pattern)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("a.jsonl") && err.contains('2'), "{err}");
}

#[test]
fn report_rejects_bad_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.jsonl"), "{\"command\":\"x\",\"result\":{}}\nnot json\n").unwrap();
    let pattern = dir.path().join("*.jsonl");
    let out = nullcode(&["report", "--glob", path_str(&pattern)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tbnc_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tb.json");
    let gen = nullcode(&["tbnc", "gen", "--toy", "self-dual-8-4", "--copies", "2", "--lambda", "2", "--out", path_str(&path)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let run = nullcode(&["tbnc", "alg2", "--file", path_str(&path), "--seed", "3"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let r = records(&run);
    assert_eq!(r.len(), 1);
    assert!(r[0]["result"]["success"].is_boolean());
}

#[test]
fn union_bound_value() {
    let out = nullcode(&["tbnc", "union-bound", "--r", "4", "--copies", "2", "--suc", "0.5"]);
    assert!(out.status.success());
    assert_eq!(records(&out)[0]["result"]["value"], 4.0);
}
