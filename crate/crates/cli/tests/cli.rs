//! End-to-end checks of the CLI contract: output formats, exit codes, and
//! agreement of emitted numbers with the library.

use std::process::Command;

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_besselwalk"))
        .args(args)
        .output()
        .expect("spawn besselwalk");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1),
    )
}

/// Data lines of a CSV output (skipping `#` metadata and the header).
fn csv_records(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn loop_check_d3_emits_quarter_products() {
    let (stdout, _, code) = run(&["loop-check", "--d", "3", "--N", "100"]);
    assert_eq!(code, 0);
    let records = csv_records(&stdout);
    assert_eq!(records.len(), 99); // m = 1..=99
    for rec in &records {
        let product: f64 = rec[1].parse().unwrap();
        assert!((product - 0.25).abs() < 1e-15, "{rec:?}");
    }
    assert!(stdout.contains("# nondecreasing_and_capped: true"));
}

#[test]
fn kernel_row_n0_single_record() {
    let (stdout, _, code) = run(&["kernel-row", "--d", "3", "--N", "5", "--n", "0", "--m0", "3"]);
    assert_eq!(code, 0);
    let records = csv_records(&stdout);
    assert_eq!(records.len(), 1);
    assert_eq!(records[0][0], "3");
    assert_eq!(records[0][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn csv_metadata_records_resolved_params_and_seed() {
    let (stdout, _, code) = run(&[
        "estimate-diagonal",
        "--d",
        "3",
        "--t",
        "0.05",
        "--dt",
        "1e-3",
        "--paths",
        "500",
        "--seed",
        "31",
        "--grid",
        "0.4,0.8",
    ]);
    assert_eq!(code, 0);
    for key in ["# command:", "# d: 3", "# seed: 31", "# paths: 500", "# epsilon:"] {
        assert!(stdout.contains(key), "missing {key} in:\n{stdout}");
    }
}

#[test]
fn json_output_is_valid_and_typed() {
    let (stdout, _, code) = run(&[
        "interval-identity",
        "--t",
        "0.1",
        "--points",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["meta"]["command"], "interval-identity");
    assert_eq!(v["records"].as_array().unwrap().len(), 5);
    assert!(v["records"][1]["neumann"].is_f64());
}

#[test]
fn counterexample_reports_verdict_json() {
    let (stdout, _, code) = run(&[
        "counterexample-2d",
        "--t",
        "0.01",
        "--paths",
        "50000",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["meta"]["verdict"], "non-monotone confirmed");
    let d0 = v["records"][0]["density"].as_f64().unwrap();
    let d1 = v["records"][1]["density"].as_f64().unwrap();
    assert!(d0 > d1);
}

#[test]
fn usage_and_domain_errors_exit_2() {
    let (_, _, code) = run(&["no-such-command"]);
    assert_eq!(code, 2);
    let (_, stderr, code) = run(&["loop-check", "--d", "2", "--N", "100"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("domain error"));
    let (_, _, code) = run(&["kernel-row", "--d", "3", "--N", "5", "--n", "1", "--m0", "9"]);
    assert_eq!(code, 2);
    let (_, _, code) = run(&["counterexample-2d", "--t", "0.5", "--paths", "1000"]);
    assert_eq!(code, 2);
}

#[test]
fn statistically_underpowered_verdict_exits_1() {
    // 150 paths cannot produce a 3-sigma separation
    let (_, stderr, code) = run(&[
        "counterexample-2d",
        "--t",
        "0.01",
        "--dt",
        "1e-4",
        "--paths",
        "150",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 1, "{stderr}");
    assert!(stderr.contains("property violation"));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("besselwalk-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("row.csv");
    let (_, _, code) = run(&[
        "kernel-row",
        "--d",
        "3",
        "--N",
        "6",
        "--n",
        "4",
        "--m0",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let records = csv_records(&text);
    let total: f64 = records
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn kernel_row_matches_enumeration_oracle() {
    let (stdout, _, code) = run(&[
        "kernel-row", "--d", "4", "--N", "7", "--n", "6", "--m0", "2", "--rational",
    ]);
    assert_eq!(code, 0);
    let expected = besselwalk_oracles::kernel_by_enumeration(4, 7, 6, 2);
    for rec in csv_records(&stdout) {
        let m: i64 = rec[0].parse().unwrap();
        let p: f64 = rec[1].parse().unwrap();
        let e = expected
            .get(&m)
            .map(besselwalk_oracles::to_f64)
            .unwrap_or(0.0);
        assert!((p - e).abs() < 1e-15, "state {m}: {p} vs {e}");
    }
}
