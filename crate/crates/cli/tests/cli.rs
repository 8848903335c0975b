use std::process::Command;

use serde_json::{json, Value};

fn chainwarn(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_chainwarn")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn report(args: &[&str]) -> Value {
    let (code, stdout, stderr) = chainwarn(args);
    assert_eq!(code, 0, "{args:?}: {stderr}");
    serde_json::from_str(&stdout).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

#[test]
fn mbound_example() {
    let r = report(&["mbound", "--a", "2,2,2", "--N", "5"]);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["value"], 4);
    assert_eq!(r["result"]["oracle"], 4);
    assert_eq!(r["result"]["witness"], json!([1, 2, 2]));
    assert_eq!(r["config"]["params"], json!({"a": [2, 2, 2], "N": 5}));
}

#[test]
fn zero_sum_examples() {
    assert_eq!(report(&["davenport", "--group", "2,2"])["result"]["D"], 3);
    assert_eq!(report(&["davenport", "--group", "2,2,4"])["result"]["D"], 6);
    let r = report(&["fat-davenport", "--group", "4", "--A", "-1,0,1", "--B", "0"]);
    assert_eq!(r["result"]["D"], 3);
    let r = report(&["script-e", "--r", "3", "--q", "3"]);
    assert_eq!(r["result"]["E"], 7);
    assert_eq!(r["holds"], true);
}

#[test]
fn graph_examples() {
    let r = report(&["divisible", "--graph", "1-2,1-3", "--q", "2"]);
    assert_eq!(r["result"]["count"], 1);
    assert_eq!(r["result"]["nonempty"], 0);
    assert_eq!(r["result"]["D"], 3);
    let r = report(&["atomic-search", "--r", "3", "--q", "2", "--n", "2"]);
    assert_eq!(r["result"]["graph"], "1-2,1-3");
    let r = report(&["hypergraph", "--sets", "1;2;3", "--m", "2", "--B", "0"]);
    assert_eq!(r["result"]["count"], 4);
}

#[test]
fn warning_examples() {
    let r = report(&["verify-main", "--p", "2", "--A", "0,1;0,1", "--polys", "t1*t2", "--vj", "1", "--B", "0"]);
    assert_eq!(r["result"]["count"], 3);
    assert_eq!(r["result"]["fat_target_count"], 3);
    assert_eq!(r["result"]["bound"], 1);
    let r = report(&["alon-furedi", "--p", "3", "--A", "0,1,2;0,1,2", "--y", "2,1"]);
    assert_eq!(r["holds"], true);
}

#[test]
fn troi_zannier_example() {
    let r = report(&["troi-zannier", "--q", "3", "--B", "1:0;2:0"]);
    // f(0) = f(1) = f(2) = 0 forces t^3 - t
    assert_eq!(r["result"]["min_degree"], 3);
    assert_eq!(r["result"]["displayed_bound"], "5/2");
    assert_eq!(r["status"], "pass");
}

#[test]
fn exit_codes() {
    assert_eq!(chainwarn(&["bogus"]).0, 2);
    assert_eq!(chainwarn(&["run"]).0, 2);
    assert_eq!(chainwarn(&["mbound", "--a", "x"]).0, 3);
    assert_eq!(chainwarn(&["mbound", "--a", "2,2"]).0, 3);
    assert_eq!(chainwarn(&["mbound", "--a", "2,2", "--N", "2", "--budget", "0"]).0, 3);
    assert_eq!(chainwarn(&["davenport", "--group", "2,3"]).0, 3);
    assert_eq!(chainwarn(&["davenport", "--group", "3,3,3,3,3"]).0, 3);
    assert_eq!(chainwarn(&["davenport", "--group", "2,2,2,2,2", "--budget", "10"]).0, 4);
    assert_eq!(chainwarn(&["mbound", "--config", "/nonexistent/config.json"]).0, 3);
}

#[test]
fn config_files_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let out = dir.path().join("r.json");
    std::fs::write(&cfg, r#"{"kind": "mbound", "params": {"a": [2, 2, 2], "N": 5}, "seed": 7}"#).unwrap();
    let (code, stdout, _) = chainwarn(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["value"], 4);
    assert_eq!(r["config"]["seed"], 7);

    // flags override the config, and the kind must agree with the subcommand
    let r = report(&["mbound", "--config", cfg.to_str().unwrap(), "--N", "6"]);
    assert_eq!(r["config"]["params"]["N"], 6);
    assert_eq!(chainwarn(&["davenport", "--config", cfg.to_str().unwrap()]).0, 2);

    // a bare params object
    std::fs::write(&cfg, r#"{"group": [3, 3]}"#).unwrap();
    assert_eq!(report(&["davenport", "--config", cfg.to_str().unwrap()])["result"]["D"], 5);
    std::fs::write(&cfg, r#"{"group": [3, 3], "colour": 1}"#).unwrap();
    assert_eq!(chainwarn(&["davenport", "--config", cfg.to_str().unwrap()]).0, 3);
}

#[test]
fn csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    report(&["mbound", "--a", "2,2,2", "--N", "5", "--csv", csv.to_str().unwrap()]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("value,4\n"));

    report(&[
        "sweep",
        "--kind",
        "mbound",
        "--grid",
        r#"{"a": [[2,2],[3]], "N": {"range": [1, 2]}}"#,
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let mut rows = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(rows.headers().unwrap(), vec!["index", "status", "holds", "params", "result"]);
    let rows: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[3][0], "3");
}

#[test]
fn reruns_are_identical() {
    let args = ["sweep", "--kind", "verify-main", "--random", r#"{"count": 40}"#, "--seed", "11", "--workers", "4"];
    let a = without_timing(report(&args));
    let b = without_timing(report(&args));
    assert_eq!(a, b);
    assert_eq!(a["result"]["instances"], 40);
    assert_eq!(a["result"]["failed"], 0);
    let c = without_timing(report(&["sweep", "--kind", "verify-main", "--random", r#"{"count": 40}"#, "--seed", "12"]));
    assert_ne!(a["result"]["results"], c["result"]["results"]);
}

#[test]
fn sweeps() {
    let r = report(&[
        "sweep",
        "--kind",
        "mbound",
        "--grid",
        r#"{"a": {"vectors": {"max_len": 3, "max": 3}}, "N": {"range": [1, 9]}}"#,
    ]);
    let res = &r["result"];
    assert_eq!(res["instances"], 9 * (3 + 9 + 27));
    assert_eq!(res["failed"], 0);
    assert_eq!(r["status"], "pass");
    // N above the total is a bad instance, not a failure
    assert!(res["skipped"].as_u64().unwrap() > 0);
    let n = |k: &str| res[k].as_u64().unwrap();
    assert_eq!(n("passed") + n("skipped") + n("budget_exceeded"), n("instances"));

    // an empty axis passes vacuously
    let r = report(&["sweep", "--kind", "mbound", "--grid", r#"{"N": {"range": [1, 0]}}"#]);
    assert_eq!(r["result"]["instances"], 0);
    assert_eq!(r["status"], "pass");

    let r = report(&[
        "sweep",
        "--kind",
        "divisible",
        "--random",
        r#"{"count": 30, "max_r": 3, "max_n": 6}"#,
        "--seed",
        "5",
    ]);
    assert_eq!(r["result"]["failed"], 0);
    let r = report(&["sweep", "--kind", "hypergraph", "--random", r#"{"count": 30}"#, "--seed", "5"]);
    assert_eq!(r["result"]["failed"], 0);

    assert_eq!(chainwarn(&["sweep", "--kind", "nope", "--grid", "{}"]).0, 2);
    assert_eq!(chainwarn(&["sweep", "--kind", "mbound", "--random", r#"{"depth": 3}"#]).0, 3);
}

#[test]
fn budget_usage() {
    // every single charge fits in the total, so the total is always enough
    for args in [
        vec!["davenport", "--group", "2,2,4"],
        vec!["atomic-search", "--r", "3", "--q", "2", "--n", "2"],
        vec!["divisible", "--graph", "1-2,2-3,1-3,1-1", "--q", "2"],
    ] {
        let r = report(&args);
        let used = r["budget_used"].as_u64().unwrap();
        assert!(used > 0, "{args:?}");
        let cap = used.to_string();
        let again = report(&[args.clone(), vec!["--budget", &cap]].concat());
        assert_eq!(again["result"], r["result"]);
        assert_eq!(again["budget_used"], used);
    }
    let r = report(&["sweep", "--kind", "hypergraph", "--random", r#"{"count": 10}"#, "--seed", "2"]);
    let per: u64 = r["result"]["results"].as_array().unwrap().iter().map(|x| x["budget_used"].as_u64().unwrap()).sum();
    assert_eq!(r["result"]["budget_used"], per);
    assert_eq!(r["budget_used"], per);
}

#[test]
fn table_format() {
    let (code, stdout, _) = chainwarn(&["davenport", "--group", "2,2", "--format", "table"]);
    assert_eq!(code, 0);
    assert!(stdout.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["D", "3"]));
    assert!(stdout.lines().last().unwrap().starts_with("status"));
}
