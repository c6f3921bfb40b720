//! End-to-end tests of the `stickbreak` binary.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use stickbreak::record::RunRecord;

fn stickbreak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stickbreak")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn lexmerge_seven_prints_golden_trace() {
    let out = stickbreak(&["lexmerge", "--n", "7", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in [
        "B_0 = {[0],[0],[1],[1],[2],[2],[3]}",
        "B_1 = {[1],[1],[2],[2],[3],[0,0]}",
        "B_2 = {[2],[2],[3],[0,0],[1,1]}",
        "B_3 = {[3],[0,0],[1,1],[2,2]}",
        "B_4 = {[1,1],[2,2],[0,0,3]}",
        "B_5 = {[0,0,3],[1,1,2,2]}",
        "B_6 = {[0,0,1,1,2,2,3]}",
    ] {
        assert!(text.contains(line), "missing `{line}` in\n{text}");
    }
    assert!(text.contains("1.68179283051"));
    assert!(text.contains("certified"));
}

#[test]
fn lexmerge_one_has_unit_discrepancy() {
    let out = stickbreak(&["lexmerge", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("= 1.00000000000"));
}

#[test]
fn lexmerge_rejects_zero() {
    assert_eq!(stickbreak(&["lexmerge", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn exported_trace_audits_clean() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lm200.json");
    let p = path.to_str().unwrap();
    assert_eq!(stickbreak(&["lexmerge", "--n", "200", "--json", p]).status.code(), Some(0));
    let out = stickbreak(&["verify", "--trace", p]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains(" 0 fail"));
    assert!(text.contains("recorded_data"));
}

#[test]
fn corrupted_trace_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lm7.json");
    let p = path.to_str().unwrap();
    stickbreak(&["lexmerge", "--n", "7", "--json", p]);
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    v["collections"][1][0][0] = Value::from(3);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = stickbreak(&["verify", "--trace", p]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(1), "{text}");
    assert!(text.contains("FAIL"));
    assert!(text.contains("conservation"));
}

#[test]
fn malformed_trace_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"n\": 7, \"m\": ").unwrap();
    let out = stickbreak(&["verify", "--trace", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(stickbreak(&["verify", "--trace", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unknown_check_is_a_usage_error() {
    let out = stickbreak(&["verify", "--from", "3", "--to", "4", "--checks", "p1,bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn verify_selected_checks() {
    let out = stickbreak(&["verify", "--from", "7", "--to", "7", "--checks", "p1,p2,p3"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0));
    assert!(text.contains("3 reports: 3 pass"), "{text}");
}

#[test]
fn verify_range_passes() {
    let out = stickbreak(&["verify", "--from", "1", "--to", "30"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn bounds_csv_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = stickbreak(&["bounds", "--from", "1", "--to", "50", "--csv", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,lower_bound,lexmerge,dbe_bound");
    assert_eq!(lines[4], "4,1.41421356237,1.41421356237,1.67109431669");
    assert_eq!(lines.len(), 51);
}

#[test]
fn bounds_with_optimal_column() {
    let out = stickbreak(&["bounds", "--to", "5", "--with-optimal", "--tol", "1e-5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("n,lower_bound,lexmerge,dbe_bound,optimal\n"), "{text}");
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn optimize_is_deterministic_across_job_counts() {
    let one = stickbreak(&["optimize", "--n", "6", "--jobs", "1"]);
    let four = stickbreak(&["optimize", "--n", "6", "--jobs", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&four));
    assert!(stdout(&one).contains("verdict               consistent"));
}

#[test]
fn optimize_above_cap_is_a_usage_error() {
    assert_eq!(stickbreak(&["optimize", "--n", "12"]).status.code(), Some(2));
}

#[test]
fn optimize_csv_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("opt.csv");
    let out = stickbreak(&["optimize", "--n", "3", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "3");
    let value: f64 = row[1].parse().unwrap();
    assert!((value - 2f64.sqrt()).abs() < 1e-6);
    assert_eq!(row[5], "consistent");
}

#[test]
fn dbe_three_points_and_gaps() {
    let out = stickbreak(&["dbe", "--n", "3"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0));
    assert!(text.contains("x_2 = 0.584962500721"), "{text}");
    assert!(text.contains("gaps: [0.263034405834, 0.321928094887, 0.415037499279]"));
}

#[test]
fn dbe_prefix_discrepancy_stays_below_two() {
    let out = stickbreak(&["dbe", "--n", "1000", "--prefix-disc"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\n1000,"));
}

#[test]
fn run_record_has_valid_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.json");
    let out = stickbreak(&["--record", path.to_str().unwrap(), "lexmerge", "--n", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let rec: RunRecord = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rec.command, "lexmerge");
    assert_eq!(rec.parameters["n"], 9);
    assert_eq!(rec.payload["n"], 9);
    assert!(rec.checksum_matches());
    assert_eq!(rec.checksum.len(), 64);
}
