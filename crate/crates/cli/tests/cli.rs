use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ptawit::model::Direction;
use ptawit::parser::parse;
use ptawit::reach::pta_probability;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ptawit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptawit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_prints_exact_probabilities() {
    let fig1 = fixture("fig1.pta");
    let o = ptawit(&["check", path(&fig1), "--dir", "max"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "687/1250 (= 0.5496)");

    let o = ptawit(&["check", path(&fixture("goal-initial.pta")), "--dir", "min"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1/1");
}

#[test]
fn check_min_agrees_with_the_library() {
    let fig1 = fixture("fig1.pta");
    let t = parse(&std::fs::read_to_string(&fig1).unwrap()).unwrap();
    let p = pta_probability(&t, t.clamp(), Direction::Min).unwrap();
    let o = ptawit(&["check", path(&fig1), "--dir", "min"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with(&format!("{p} (= ")), "{out}");
}

#[test]
fn check_json_is_structured() {
    let o = ptawit(&["--json", "check", path(&fixture("fig1.pta")), "--dir", "max"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["probability"], "687/1250");
    assert_eq!(v["direction"], "max");
}

#[test]
fn loc_witness_min_and_self_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = fixture("fig1.pta");
    let o = ptawit(&[
        "witness", path(&fig1), "--dir", "min", "--lambda", "6/25", "--notion", "loc", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("optimum 2 locations: l0,l2"), "{}", stdout(&o));
    assert_witnesses_verify(&fig1, dir.path(), "min", "6/25", 1);
}

#[test]
fn loc_witness_enumeration_max() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = fixture("fig1.pta");
    let o = ptawit(&[
        "witness", path(&fig1), "--dir", "max", "--lambda", "0.24", "--notion", "loc", "--enumerate", "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("optimum 2 locations: l0,l1 | l0,l2"), "{}", stdout(&o));
    assert_witnesses_verify(&fig1, dir.path(), "max", "6/25", 2);
}

#[test]
fn vol_witness_max_has_volume_zero() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = fixture("fig1.pta");
    let report = dir.path().join("report.txt");
    let o = ptawit(&[
        "witness", path(&fig1), "--dir", "max", "--lambda", "6/25", "--notion", "vol", "--out", path(dir.path()),
        "--report", path(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("optimum volume 0"), "{}", stdout(&o));
    assert_eq!(std::fs::read_to_string(&report).unwrap().trim(), stdout(&o).trim());
    assert_witnesses_verify(&fig1, dir.path(), "max", "6/25", 1);
}

#[test]
fn inv_witness_min_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = fixture("fig1.pta");
    let o = ptawit(&[
        "witness", path(&fig1), "--dir", "min", "--lambda", "6/25", "--notion", "inv", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("optimum invariant weight"), "{}", stdout(&o));
    assert_witnesses_verify(&fig1, dir.path(), "min", "6/25", 1);
}

#[test]
fn heuristic_witness_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = fixture("fig1.pta");
    let o = ptawit(&[
        "witness", path(&fig1), "--dir", "max", "--lambda", "6/25", "--iterations", "5", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_witnesses_verify(&fig1, dir.path(), "max", "6/25", 1);
}

fn assert_witnesses_verify(model: &Path, dir: &Path, direction: &str, lambda: &str, expected: usize) {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pta"))
        .collect();
    files.sort();
    assert_eq!(files.len(), expected, "{files:?}");
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        assert!(text.starts_with("# model: "), "{text}");
        let o = ptawit(&["verify", path(model), path(&f), "--dir", direction, "--lambda", lambda]);
        assert_eq!(o.status.code(), Some(0), "{}: {}{}", f.display(), stdout(&o), stderr(&o));
        assert!(stdout(&o).starts_with("PASS ("), "{}", stdout(&o));
    }
}

#[test]
fn infeasible_threshold_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptawit(&[
        "witness", path(&fixture("fig1.pta")), "--dir", "max", "--lambda", "1", "--notion", "loc", "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threshold exceeds Pr^*"), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn verify_fixture_witnesses() {
    let fig1 = fixture("fig1.pta");
    let o = ptawit(&["verify", path(&fig1), path(&fixture("table1-min-loc.pta")), "--dir", "min", "--lambda", "6/25"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "PASS (strong subsystem, Pr_min = 6/25)");

    let o = ptawit(&["verify", path(&fig1), path(&fixture("fig1b.pta")), "--dir", "min", "--lambda", "6/25"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).starts_with("FAIL: not a strong subsystem"), "{}", stdout(&o));
}

#[test]
fn verify_reports_threshold_shortfall() {
    let o = ptawit(&[
        "--json",
        "verify",
        path(&fixture("fig1.pta")),
        path(&fixture("table1-min-loc.pta")),
        "--dir",
        "min",
        "--lambda",
        "1/2",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["probability"], "6/25");
}

#[test]
fn quotient_dot_export() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("out.dot");
    let o = ptawit(&["quotient", path(&fixture("fig1.pta")), "--dot", path(&dot)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("states"), "{}", stdout(&o));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"), "{text}");
    assert!(text.contains("goal") && text.contains("fail"));
}

#[test]
fn volume_of_fixture() {
    let o = ptawit(&["volume", path(&fixture("goal-initial.pta"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!stdout(&o).trim().is_empty());
}

#[test]
fn usage_and_parse_errors_exit_1() {
    assert_eq!(ptawit(&["check"]).status.code(), Some(1));
    assert_eq!(ptawit(&["check", path(&fixture("fig1.pta")), "--dir", "sideways"]).status.code(), Some(1));
    let o = ptawit(&["witness", path(&fixture("fig1.pta")), "--dir", "max", "--lambda", "3/2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(ptawit(&["check", "/nonexistent.pta", "--dir", "max"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pta");
    std::fs::write(&bad, "clocks x;\nloc a init inv \"x <=\";\n").unwrap();
    let o = ptawit(&["check", path(&bad), "--dir", "max"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
}

#[test]
fn assumption_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("deadlock.pta");
    std::fs::write(
        &model,
        "clocks x;\nloc a inv \"x<=1\" init;\nloc g goal;\nloc f fail;\ntrans a guard \"x>=2\" act u { 1 -> g; };\n",
    )
    .unwrap();
    let o = ptawit(&["check", path(&model), "--dir", "min"]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    let o = ptawit(&["witness", path(&model), "--dir", "min", "--lambda", "0", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
}
