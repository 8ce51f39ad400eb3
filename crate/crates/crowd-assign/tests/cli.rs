//! End-to-end checks of the command-line surface: output formats, error
//! paths, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

const TOY: &str = concat!(
    r#"{"budget":2.5,"num_tasks":2,"bid_ceiling":2.5,"workers":["#,
    r#"{"id":0,"bids":{"0":1.0,"1":1.25}},"#,
    r#"{"id":1,"bids":{"0":1.125,"1":1.75}}]}"#
);

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowd-assign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_toy(dir: &Path) -> String {
    let path = dir.join("toy.json");
    std::fs::write(&path, TOY).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_offline_prints_the_flow_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let toy = write_toy(dir.path());
    let out = run(&["solve-offline", "--instance", &toy]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        stdout.trim_end(),
        r#"{"algorithm":"flow","F":2,"total_cost":2.375,"assignment":{"pairs":[{"worker":0,"task":1,"payment":1.25},{"worker":1,"task":0,"payment":1.125}]}}"#
    );
}

#[test]
fn solve_offline_greedy_shows_the_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let toy = write_toy(dir.path());
    let out = run(&["solve-offline", "--instance", &toy, "--algorithm", "greedy"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["F"], 1);
    let brute = run(&["solve-offline", "--instance", &toy, "--algorithm", "brute"]);
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(brute.stdout).unwrap()).unwrap();
    assert_eq!(parsed["F"], 2);
}

#[test]
fn run_threshold_oa_reports_q_and_price() {
    let dir = tempfile::tempdir().unwrap();
    let toy = write_toy(dir.path());
    let out = run(&["run-threshold", "--instance", &toy, "--policy", "oa"]);
    assert!(out.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(parsed["q"], 1);
    assert_eq!(parsed["p_star"], 2.5);
}

#[test]
fn run_threshold_ftp_requires_a_price() {
    let dir = tempfile::tempdir().unwrap();
    let toy = write_toy(dir.path());
    let out = run(&["run-threshold", "--instance", &toy, "--policy", "ftp"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("--price"), "{stderr}");

    let ok = run(&[
        "run-threshold",
        "--instance",
        &toy,
        "--policy",
        "ftp",
        "--price",
        "1.25",
    ]);
    assert!(ok.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(ok.stdout).unwrap()).unwrap();
    assert_eq!(parsed["q"], 1);
}

#[test]
fn run_online_reports_pairs_and_spend() {
    let dir = tempfile::tempdir().unwrap();
    let toy = write_toy(dir.path());
    let oha = run(&["run-online", "--instance", &toy, "--algorithm", "oha"]);
    assert!(oha.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(oha.stdout).unwrap()).unwrap();
    assert_eq!(parsed["pairs"], 1);
    assert_eq!(parsed["spend"], 1.0);

    let rpa = run(&[
        "run-online",
        "--instance",
        &toy,
        "--algorithm",
        "rpa",
        "--budget-mode",
        "full",
        "--payment",
        "bid",
    ]);
    assert!(rpa.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(rpa.stdout).unwrap()).unwrap();
    assert_eq!(parsed["pairs"], 1);
}

#[test]
fn invalid_instances_fail_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"budget":4,"num_tasks":1,"bid_ceiling":2,"workers":[{"id":0,"bids":{"0":0.5}}]}"#,
    )
    .unwrap();
    let out = run(&["solve-offline", "--instance", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("worker 0"), "{stderr}");
    assert!(stderr.contains("bid below 1"), "{stderr}");
}

#[test]
fn gen_instance_writes_parseable_files_for_each_family() {
    let dir = tempfile::tempdir().unwrap();
    for (family, extra) in [
        ("adversarial", vec!["--R", "4"]),
        ("uniform", vec!["--R", "10"]),
        ("lowerbound", vec!["--R", "4", "--eta", "0.5", "--B", "8"]),
    ] {
        let path = dir.path().join(format!("{family}.json"));
        let mut args = vec!["gen-instance", "--family", family, "--seed", "1", "--out"];
        let path_str = path.to_str().unwrap().to_string();
        args.push(&path_str);
        let extra_refs: Vec<&str> = extra.to_vec();
        let mut full = args.clone();
        full.extend(extra_refs);
        let out = run(&full);
        assert!(out.status.success(), "{family}");
        let text = std::fs::read_to_string(&path).unwrap();
        let inst = crowd_assign::parse_instance(&text).unwrap();
        assert!(inst.num_workers() > 0);
    }
}

#[test]
fn lowerbound_experiment_prints_a_passing_report() {
    let out = run(&[
        "experiment",
        "lowerbound",
        "--eta",
        "0.5",
        "--R",
        "4",
        "--samples",
        "50",
        "--seed",
        "0",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("bound=0.6"), "{stdout}");
    assert!(stdout.trim_end().ends_with("OK"), "{stdout}");
}
