use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lpn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpn"))
        .args(args)
        .env_remove("LPN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Rows of a CSV document as header-keyed lookups.
fn rows(text: &str) -> Vec<Vec<(String, String)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(str::to_string)).collect())
        .collect()
}

fn field<'a>(row: &'a [(String, String)], name: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == name).unwrap_or_else(|| panic!("no column {name}")).1
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--k", "10", "--count", "50", "--eta", "0.125", "--seed", "9"];
    let a = stdout(&lpn(&args));
    let b = stdout(&lpn(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 51);
    assert!(a.starts_with("LPN v1 k=10 eta=0.125 seed=9 count=50"));
    assert!(!a.contains("TARGET"));
}

#[test]
fn gen_zero_count_writes_header_only() {
    let text = stdout(&lpn(&["gen", "--k", "4", "--count", "0", "--eta", "0.1"]));
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn mle_recovers_noiseless_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("clean.lpn");
    stdout(&lpn(&["gen", "--k", "8", "--count", "300", "--eta", "0", "--seed", "5", "--with-target", "--out", path_str(&file)]));
    let text = stdout(&lpn(&["solve", "--algo", "mle", "--in", path_str(&file)]));
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    assert_eq!(field(&r[0], "schema"), "solve/v1");
    assert_eq!(field(&r[0], "success"), "true");
    assert_eq!(field(&r[0], "c_hat"), field(&r[0], "target"));
    assert_eq!(field(&r[0], "examples_used"), "300");
}

#[test]
fn gauss_reports_inconsistent_on_noisy_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("noisy.lpn");
    stdout(&lpn(&["gen", "--k", "6", "--count", "200", "--eta", "0.2", "--seed", "3", "--out", path_str(&file)]));
    let r = rows(&stdout(&lpn(&["solve", "--algo", "gauss", "--in", path_str(&file)])));
    assert_eq!(field(&r[0], "status"), "inconsistent");
    assert_eq!(field(&r[0], "target"), "");
}

#[test]
fn bkw_live_runs_one_row_per_seed() {
    let r = rows(&stdout(&lpn(&["solve", "--algo", "bkw", "--k", "12", "--eta", "0.05", "--seeds", "3", "--seed", "2"])));
    assert_eq!(r.len(), 3);
    for row in &r {
        assert_eq!(field(row, "status"), "recovered");
        assert_eq!(field(row, "success"), "true");
        assert_eq!(field(row, "a"), "2");
        assert_eq!(field(row, "b"), "6");
    }
}

#[test]
fn explicit_seed_reproduces_a_row() {
    let batch = rows(&stdout(&lpn(&["solve", "--algo", "mle", "--k", "8", "--eta", "0.1", "--seeds", "2", "--count", "400"])));
    let seed = field(&batch[1], "seed").to_string();
    let single = rows(&stdout(&lpn(&["solve", "--algo", "mle", "--k", "8", "--eta", "0.1", "--seeds", &format!("{seed},"), "--count", "400"])));
    assert_eq!(field(&single[0], "c_hat"), field(&batch[1], "c_hat"));
    assert_eq!(field(&single[0], "target"), field(&batch[1], "target"));
}

#[test]
fn online_reports_predictions() {
    let r = rows(&stdout(&lpn(&[
        "solve", "--algo", "online", "--k", "8", "--eta", "0.01", "--blocks", "2", "--width", "4", "--count", "4000",
    ])));
    let predicted: u64 = field(&r[0], "predicted").parse().unwrap();
    let unknown: u64 = field(&r[0], "unknown").parse().unwrap();
    assert_eq!(predicted + unknown, 4000);
    assert!(predicted > 0);
    let depth: u32 = field(&r[0], "max_depth").parse().unwrap();
    assert!(depth <= 4);
}

#[test]
fn json_output_parses() {
    let text = stdout(&lpn(&["bias", "--eta", "0.1", "--s", "4", "--trials", "20000", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rec = &v[0];
    assert_eq!(rec["schema"], "bias/v1");
    assert!((rec["predicted"].as_f64().unwrap() - 0.7048).abs() < 1e-12);
    assert!(rec["z"].as_f64().unwrap().abs() < 4.0);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("dim.csv");
    let out = lpn(&["sq", "dim", "--class", "parity:3-of-3", "--out", path_str(&file)]);
    assert!(stdout(&out).is_empty());
    let r = rows(&std::fs::read_to_string(&file).unwrap());
    assert_eq!(field(&r[0], "d"), "8");
    assert_eq!(field(&r[0], "certified"), "true");
}

#[test]
fn sq_basis_learn_recovers_target() {
    let r = rows(&stdout(&lpn(&["sq", "basis-learn", "--k", "3", "--seed", "7"])));
    assert_eq!(field(&r[0], "success"), "true");
    assert_eq!(field(&r[0], "recovered"), field(&r[0], "target"));
    let r = rows(&stdout(&lpn(&["sq", "basis-learn", "--k", "3", "--target", "101"])));
    assert_eq!(field(&r[0], "recovered"), "101");
}

#[test]
fn sq_reduce_covers_every_concept() {
    let r = rows(&stdout(&lpn(&["sq", "reduce", "--class", "parity:2-of-2"])));
    assert_eq!(r.len(), 4);
    for row in &r[1..] {
        assert_eq!(field(row, "outcome"), "estimate");
        let est: f64 = field(row, "estimate").parse().unwrap();
        let truth: f64 = field(row, "truth").parse().unwrap();
        let bound: f64 = field(row, "error_bound").parse().unwrap();
        assert!((est - truth).abs() <= bound);
    }
    assert_eq!(field(&r[0], "outcome"), "weak_hypothesis");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(lpn(&["solve", "--algo", "mle", "--k", "3"]).status.code(), Some(1));
    assert_eq!(lpn(&["solve", "--algo", "online", "--k", "8", "--eta", "0.1"]).status.code(), Some(1));
    assert_eq!(lpn(&["bias", "--eta", "0.7", "--s", "2"]).status.code(), Some(1));
    assert_eq!(lpn(&["solve", "--algo", "mle", "--k", "4", "--eta", "0.1", "--seeds", "1,1"]).status.code(), Some(1));
    assert_eq!(lpn(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("bad.lpn");
    std::fs::write(&file, "LPN v1 k=x eta=0.1 seed=0 count=0\n").unwrap();
    let out = lpn(&["solve", "--algo", "mle", "--in", path_str(&file)]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.lpn");
    assert_eq!(lpn(&["solve", "--algo", "mle", "--in", path_str(&missing)]).status.code(), Some(2));
}

#[test]
fn exhausted_budget_exits_3() {
    let out = lpn(&["solve", "--algo", "bkw", "--k", "12", "--eta", "0.1", "--max-examples", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    let r = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(field(&r[0], "status"), "budget_exceeded");
    assert_eq!(field(&r[0], "success"), "false");
}

#[test]
fn short_file_exhausts_bkw_stream() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("short.lpn");
    stdout(&lpn(&["gen", "--k", "12", "--count", "20", "--eta", "0.1", "--out", path_str(&file)]));
    let out = lpn(&["solve", "--algo", "bkw", "--in", path_str(&file)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sq_reduce_label_free_query_estimates() {
    let r = rows(&stdout(&lpn(&["sq", "reduce", "--class", "parity:2-of-2", "--query", "unlabeled-and"])));
    for row in &r {
        match field(row, "concept") {
            // x1 is a slice of the query and also the target, so it is a weak hypothesis.
            "parity[10]" => assert_eq!(field(row, "outcome"), "weak_hypothesis"),
            "parity[00]" => assert_eq!(field(row, "hypothesis_source"), "balance"),
            _ => {
                assert_eq!(field(row, "outcome"), "estimate");
                assert_eq!(field(row, "estimate"), "0.25");
                assert_eq!(field(row, "truth"), "0.25");
            }
        }
    }
}

fn parity_of_hex(x: &str, c: &str) -> bool {
    let x = u64::from_str_radix(x, 16).unwrap();
    let c = u64::from_str_radix(c, 16).unwrap();
    (x & c).count_ones() % 2 == 1
}

#[test]
fn noiseless_file_labels_match_target() {
    let text = stdout(&lpn(&["gen", "--k", "8", "--count", "100", "--eta", "0", "--seed", "11", "--with-target"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102);
    let target = lines[101].strip_prefix("TARGET ").unwrap();
    for line in &lines[1..101] {
        let (x, label) = line.split_once(' ').unwrap();
        assert_eq!(parity_of_hex(x, target), label == "1", "{line}");
    }
}
