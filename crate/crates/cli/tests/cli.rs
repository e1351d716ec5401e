use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_streamalg"));
    c.env_remove("STREAMALG_SEED");
    c
}

fn term(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../terms").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> (i32, Value, Output) {
    let out = bin().args(args).output().expect("binary runs");
    let code = out.status.code().expect("exited");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, report, out)
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn run_prefix_sum_per_generator() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let (code, r, _) = run(&["run", "prefix-sum", "--input", "[1,2,3]", "--out", trace.to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["suite"], "run");
    assert_eq!(r["increments"], json!([[1], [3], [6]]));
    assert_eq!(r["total"], json!([1, 3, 6]));
    assert!(r["failures"].as_array().unwrap().is_empty());

    let lines: Vec<Value> = fs::read_to_string(&trace).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0]["example"], "prefix-sum");
    assert!(lines[0]["monoid"].is_string());
    assert_eq!(lines[1]["chunk"], json!([1]));
    assert_eq!(lines[3]["output"], json!([6]));
    assert!(lines[2]["state"].is_string());
    assert_eq!(lines[4], json!({ "total": [1, 3, 6] }));
}

#[test]
fn run_chunkings_agree() {
    let totals: Vec<Value> = ["whole", "per-generator", "2,1", "random"]
        .iter()
        .map(|c| {
            let (code, r, _) = run(&["run", "prefix-sum", "--input", "[4,-1,2]", "--chunking", c]);
            assert_eq!(code, 0);
            r["total"].clone()
        })
        .collect();
    assert!(totals.iter().all(|t| *t == json!([4, 3, 5])), "{totals:?}");
}

#[test]
fn run_empty_input_gives_initial_output() {
    let (code, r, _) = run(&["run", "prefix-sum", "--input", "[]"]);
    assert_eq!(code, 0);
    assert_eq!(r["total"], json!([]));
    assert_eq!(r["initial_output"], json!([]));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["run", "no-such-example", "--input", "[]"]).0, 2);
    assert_eq!(run(&["run", "prefix-sum", "--input", "[1,"]).0, 2);
    assert_eq!(run(&["run", "prefix-sum", "--input", "[1]", "--chunking", "0"]).0, 2);
    assert_eq!(run(&["laws", "--scope", "everything"]).0, 2);
    let (code, _, out) = run(&["equiv", term("prefix-sum").to_str().unwrap(), term("join").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("different types"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kind": "stateful", "children": [], "refs": ["nope"]}"#).unwrap();
    assert_eq!(run(&["optimize", bad.to_str().unwrap()]).0, 2);
}

#[test]
fn laws_small_budget_is_well_formed() {
    let (code, r, _) = run(&["laws", "--scope", "monoids", "--budget", "1"]);
    assert_eq!(code, 0);
    for key in ["suite", "cases", "failures", "seed", "wall_time_ms"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn laws_catch_an_injected_broken_monoid() {
    let (code, r, _) = run(&["laws", "--scope", "monoids", "--budget", "200", "--inject-broken"]);
    assert_eq!(code, 1);
    let failures = r["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|f| f["law"].as_str().unwrap().contains("IntSub")));
    assert!(!failures[0]["witness"].is_null());
}

#[test]
fn equiv_verdicts() {
    let pf = term("pairs-filter");
    let (code, r, _) = run(&["equiv", pf.to_str().unwrap(), term("join").to_str().unwrap(), "--budget", "300"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["status"], "equivalent");
    assert_eq!(r["cases"], 300);

    let (code, r, _) = run(&["equiv", pf.to_str().unwrap(), pf.to_str().unwrap(), "--budget", "50"]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "equivalent");

    let (code, r, _) = run(&["equiv", term("prefix-sum").to_str().unwrap(), term("list-identity").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "not_equivalent");
    assert!(!r["failures"][0]["witness"].is_null());
}

#[test]
fn optimize_fuses_pairs_filter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("opt.json");
    let (code, r, _) = run(&["optimize", term("pairs-filter").to_str().unwrap(), "--budget", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["applied"], json!(["decompose", "exchange", "recouple", "fuse"]));
    let written: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, r["term"]);
    assert_eq!(written["kind"], "stateful");

    // The written term is itself a valid input.
    let (code, r, _) = run(&["equiv", out.to_str().unwrap(), term("join").to_str().unwrap(), "--budget", "200"]);
    assert_eq!(code, 0, "{r}");
}

#[test]
fn optimize_leaves_a_single_pure_node() {
    let (code, r, _) = run(&["optimize", term("filter").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["applied"], json!([]));
    assert_eq!(r["input"], r["output"]);
}

#[test]
fn optimize_partitions_with_a_certificate() {
    let (code, r, _) = run(&["optimize", term("join").to_str().unwrap(), "--certificate", "parity", "--budget", "200"]);
    assert_eq!(code, 0, "{r}");
    let kinds: Vec<&str> = r["term"]["children"].as_array().unwrap().iter().map(|c| c["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["split", "par", "merge"]);

    // Buckets that disagree with the predicate: the certificate refuses.
    let (code, r, _) =
        run(&["optimize", term("join").to_str().unwrap(), "--certificate", "parity", "--budget", "200", "--bad-buckets"]);
    assert_eq!(code, 0);
    assert_eq!(r["input"], r["output"]);
    assert!(r["refused"].as_array().unwrap().iter().any(|x| x["rule"].as_str().unwrap().starts_with("partition")));
}

#[test]
fn optimize_rejects_an_injected_unsound_rule() {
    let (code, r, _) = run(&["optimize", term("pairs-filter").to_str().unwrap(), "--budget", "200", "--inject-broken"]);
    assert_eq!(code, 0);
    let log = r["log"].as_array().unwrap();
    let bad: Vec<&Value> = log.iter().filter(|s| s["rule"] == "drop-pure").collect();
    assert!(!bad.is_empty());
    assert!(bad.iter().all(|s| s["accepted"] == false && !s["verdict"]["witness"].is_null()));
}

#[test]
fn tcp_perfect_network_delivers_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    fs::write(&net, r#"{"seed": 0}"#).unwrap();
    let (code, r, _) = run(&["tcp", "--net1", net.to_str().unwrap(), "--net2", net.to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");
    assert!(r["runs"][0]["rounds"].as_u64().unwrap() <= 1);
}

#[test]
fn tcp_sweep_and_truncated_rounds() {
    let (code, r, _) = run(&["tcp", "--k", "8", "--seeds", "100"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["cases"], 100);
    let (code, r, _) = run(&["tcp", "--k", "8", "--seeds", "5", "--max-deadline", "8", "--max-rounds", "0"]);
    assert_eq!(code, 1);
    assert!(r["failures"].as_array().unwrap().iter().any(|f| f["law"].as_str().unwrap().contains("max rounds")));
    assert_eq!(run(&["tcp", "--k", "9"]).0, 2);
}

#[test]
fn reports_are_reproducible() {
    let t = term("pairs-filter");
    let args = ["optimize", t.to_str().unwrap(), "--budget", "100", "--seed", "9"];
    let a = without_time(run(&args).1);
    let b = without_time(run(&args).1);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a["seed"], 9);
}

#[test]
fn seed_comes_from_the_environment() {
    let out = bin().env("STREAMALG_SEED", "1234").args(["laws", "--scope", "monoids", "--budget", "5"]).output().unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 1234);
    let out = bin().env("STREAMALG_SEED", "1234").args(["--seed", "7", "laws", "--scope", "monoids", "--budget", "5"]).output().unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 7);
    let out = bin().env("STREAMALG_SEED", "x").args(["list"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
