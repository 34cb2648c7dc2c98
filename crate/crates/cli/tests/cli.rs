use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const GOLDEN: &str = "x^2-x-1";
const LEHMER: &str = "x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1";

fn bernoulli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bernoulli")).args(args).env_remove("BCONV_CACHE_DIR").output().unwrap()
}

fn json_lines(args: &[&str]) -> Vec<Value> {
    let mut full = args.to_vec();
    full.push("--json");
    let out = bernoulli(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn envelope(lines: &[Value]) -> &Value {
    let last = lines.last().unwrap();
    assert_eq!(last["type"], "envelope");
    last
}

/// Everything but the wall time.
fn stable(lines: &[Value]) -> Vec<Value> {
    lines
        .iter()
        .cloned()
        .map(|mut v| {
            if let Some(m) = v.as_object_mut() {
                m.remove("wall_time_ms");
            }
            v
        })
        .collect()
}

fn schema() -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&doc).unwrap()
}

#[test]
fn every_command_matches_the_schema() {
    let schema = schema();
    let runs: [&[&str]; 11] = [
        &["classify", GOLDEN],
        &["classify", "2x-3"],
        &["dn", GOLDEN, "--nmax", "6"],
        &["gaps", GOLDEN, "--nmax", "4"],
        &["entropy", "x^3-x-1", "--n", "6"],
        &["measure", GOLDEN, "--n", "3", "--depth", "11"],
        &["branching", "2x-3", "--samples", "2", "--N", "14", "--nmax", "6"],
        &["traces", "x^2-2", "--N", "8"],
        &["salem-sums", LEHMER, "--N", "20"],
        &["density", GOLDEN, "--points", "0,1/2T,1", "--m", "1,3"],
        &["sqrt-reduce", "x^2-3x+1"],
    ];
    for args in runs {
        let lines = json_lines(args);
        for line in &lines {
            if let Err(errors) = schema.validate(line) {
                let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
                panic!("{args:?}: {msgs:?}\n{line}");
            }
        }
        assert_eq!(envelope(&lines)["command"], args[0]);
    }
}

#[test]
fn classify_examples() {
    let lines = json_lines(&["classify", GOLDEN]);
    assert_eq!(envelope(&lines)["payload"]["is_pisot"], true);
    let lines = json_lines(&["classify", "2x-3"]);
    assert_eq!(envelope(&lines)["payload"]["is_algebraic_integer"], false);
    let out = bernoulli(&["classify", "x^2-1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x - 1") || String::from_utf8_lossy(&out.stderr).contains("x + 1"));
}

#[test]
fn exit_codes() {
    assert_eq!(bernoulli(&["classify", "x^^2"]).status.code(), Some(2));
    assert_eq!(bernoulli(&["classify", "0"]).status.code(), Some(2));
    assert_eq!(bernoulli(&["classify", "7"]).status.code(), Some(2));
    assert_eq!(bernoulli(&["dn", GOLDEN, "--nmax", "30", "--budget", "4096"]).status.code(), Some(5));
    assert_eq!(bernoulli(&["traces", "2x-3", "--N", "4"]).status.code(), Some(6));
    assert_eq!(bernoulli(&["salem-sums", GOLDEN]).status.code(), Some(6));
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "max_reduction_steps = 1\n").unwrap();
    let out = bernoulli(&["sqrt-reduce", "x^2-3", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(7));
    assert_eq!(bernoulli(&["classify", GOLDEN, "--precision-bits", "32"]).status.code(), Some(1));
}

#[test]
fn distinct_sums_for_three_halves() {
    let lines = json_lines(&["dn", "2,-3", "--nmax", "16"]);
    let rows: Vec<&Value> = lines.iter().filter(|l| l["type"] == "row").collect();
    assert_eq!(rows.len(), 16);
    for r in rows {
        let n = r["data"]["n"].as_u64().unwrap();
        assert_eq!(r["data"]["d_n"].as_u64().unwrap(), 1 << n);
    }
}

#[test]
fn golden_traces_and_gap_csv() {
    let out = bernoulli(&["traces", GOLDEN, "--N", "6", "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "r_n_err"));
    let t: Vec<i64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(t, [1, 3, 4, 7, 11, 18]);
    let env: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(env["command"], "traces");

    let out = bernoulli(&["gaps", GOLDEN, "--nmax", "12", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let col = rdr.headers().unwrap().iter().position(|h| h == "min_gap").unwrap();
    let gaps: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(gaps.len(), 12);
    assert!(gaps.iter().all(|&g| g > 0.38));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "precision_bits = 96\nseed = 9\n").unwrap();
    let c = conf.to_str().unwrap();
    let lines = json_lines(&["branching", GOLDEN, "--samples", "1", "--N", "12", "--nmax", "4", "--config", c]);
    assert_eq!(envelope(&lines)["parameters"]["seed"], 9);
    assert_eq!(envelope(&lines)["parameters"]["settings"]["precision_bits"], 96);
    let lines = json_lines(&["classify", GOLDEN, "--config", c, "--precision-bits", "200"]);
    assert_eq!(envelope(&lines)["parameters"]["settings"]["precision_bits"], 200);
}

#[test]
fn cache_hit_matches_cold_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["dn", "x^3-x-1", "--nmax", "12", "--cache-dir", d];
    let cold = stable(&json_lines(&args));
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let warm = stable(&json_lines(&args));
    assert_eq!(cold, warm);
    let plain = stable(&json_lines(&["dn", "x^3-x-1", "--nmax", "12"]));
    assert_eq!(cold, plain);

    let env_dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bernoulli"))
        .args(["measure", GOLDEN, "--n", "3", "--depth", "11", "--json"])
        .env("BCONV_CACHE_DIR", env_dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(std::fs::read_dir(env_dir.path()).unwrap().count() > 0);
}

#[test]
fn thread_count_does_not_change_output() {
    for args in [
        &["branching", GOLDEN, "--samples", "10", "--N", "20", "--nmax", "12", "--seed", "3"][..],
        &["measure", "x^3-x-2", "--n", "5", "--depth", "14"][..],
        &["gaps", LEHMER, "--nmax", "7"][..],
    ] {
        let mut one = args.to_vec();
        one.extend(["--threads", "1"]);
        let mut eight = args.to_vec();
        eight.extend(["--threads", "8"]);
        assert_eq!(stable(&json_lines(&one)), stable(&json_lines(&eight)), "{args:?}");
    }
}
