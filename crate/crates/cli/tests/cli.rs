use std::path::Path;
use std::process::{Command, Output};

fn manet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manet")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn run_writes_metrics_verdicts_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = manet(&["run", "--scenario", &scenario("golden-line3"), "--out", out, "--trace", "--check"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "metrics.csv");
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("scenario,seed,algorithm"));
    assert_eq!(read(dir.path(), "verdicts.jsonl").lines().count(), 1);
    let golden = include_str!("../../core/tests/golden/line3.jsonl");
    assert_eq!(read(dir.path(), "trace.jsonl"), golden);
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = manet(&["--scenario", &scenario("candidates-mobile"), "--out", d.path().to_str().unwrap(), "--trace"]);
        assert!(o.status.success());
    }
    for f in ["metrics.csv", "verdicts.jsonl", "trace.jsonl"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = manet(&["--algorithm", "ringz", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("algorithm") && err.contains("hierarchy|diffusion|candidates|masterslave"), "{err}");
    assert_eq!(manet(&["--set", "nodez=4", "--out", out]).status.code(), Some(2));
    assert_eq!(manet(&["--scenario", "/no/such/file.toml", "--out", out]).status.code(), Some(2));
    assert_eq!(manet(&["--seeds", "9..3", "--out", out]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = manet(&["fig4", "--seeds", "1..5", "--set", "backoff.t_slot=0", "--check", "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    let o = manet(&["fig4", "--seeds", "1..5", "--check", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(dir.path(), "fig4.csv");
    assert_eq!(csv.lines().next(), Some("seed,arm,count"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn printed_defaults_parse_back() {
    let o = manet(&["--print-defaults"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let sc = manet_elect::scenario::parse_scenario(&text).unwrap();
    assert_eq!(sc, manet_elect::scenario::Scenario::default());
}

#[test]
fn sweep_rows_cover_every_size_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = manet(&["sweep", "--sizes", "8,16,32", "--seeds", "1..10", "--set", "heartbeat.period=0", "--check", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(dir.path(), "metrics.csv").lines().count(), 31);
    let o = manet(&["sweep", "--algorithm", "masterslave", "--check", "--out", out]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("P=3: final-round messages 7, formula 7"));
}
