use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-gibbs"))
}

fn run(args: &[&str], out: &Path) -> i32 {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn summary(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn partition_without_interaction_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "partition", "--d", "2", "--n", "4", "--interaction", "wick-hartree", "--v0", "0", "--radius", "1e6",
        "--samples", "500",
    ];
    assert_eq!(run(&args, dir.path()), 0);
    let s = summary(dir.path(), "partition");
    assert_eq!(s["schema"], 1);
    assert_eq!(s["result"]["estimate"], 1.0);
    assert_eq!(s["config"]["v0"], 0.0);
    assert_eq!(s["config"]["shape"], "sharp");
}

#[test]
fn flipped_gradient_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "kms-check", "--d", "1", "--n", "8", "--interaction", "cubic", "--radius", "5", "--samples", "20000",
    ];
    assert_eq!(run(&base, dir.path()), 0);
    let ok = summary(dir.path(), "kms-check");
    assert!(ok["result"]["max_abs_z"].as_f64().unwrap() < 3.0);
    assert_eq!(ok["config"]["inner-radius"], 3.0);

    let mut flipped = base.to_vec();
    flipped.push("--flip-interaction-gradient");
    assert_eq!(run(&flipped, dir.path()), 1);
    let bad = summary(dir.path(), "kms-check");
    assert_eq!(bad["violation"], true);
    assert!(bad["result"]["max_abs_z"].as_f64().unwrap() > 5.0);
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "d = 2\nn = \"four\"\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["sample", "--config", cfg.to_str().unwrap()], &out), 2);
    assert!(!out.exists());

    std::fs::write(&cfg, "d = 2\ncutoff = 3\n").unwrap();
    assert_eq!(run(&["sample", "--config", cfg.to_str().unwrap()], &out), 2);
    assert_eq!(run(&["sample", "--d", "2", "--no-such-flag", "1"], &out), 2);
    assert_eq!(run(&["liouville-check", "--d", "2", "--interaction", "cubic"], &out), 2);
    assert_eq!(run(&["flow", "--d", "1", "--time", "1", "--dt", "0.3"], &out), 2);
    assert_eq!(run(&["kms-check", "--d", "1", "--interaction", "cubic", "--radius", "5", "--inner-radius", "5"], &out), 2);
    assert_eq!(run(&["ibp-check", "--d", "1", "--interaction", "cubic"], &out), 2);
    assert!(!out.exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "d = 2\nn = 3\nsamples = 100\nseed = 9\n").unwrap();
    assert_eq!(run(&["sample", "--config", cfg.to_str().unwrap(), "--n", "2"], dir.path()), 0);
    let s = summary(dir.path(), "sample");
    assert_eq!(s["config"]["n"], 2);
    assert_eq!(s["config"]["seed"], 9);
    assert_eq!(s["config"]["s"], 0.25);
    assert_eq!(s["result"]["modes"], 25);
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let cases: [&[&str]; 3] = [
        &["sample", "--d", "2", "--n", "3", "--samples", "3000", "--dumps", "2"],
        &["liouville-check", "--d", "1", "--n", "4", "--interaction", "cubic", "--radius", "5", "--samples", "2000", "--functions", "3"],
        &["concentration", "--statistic", "shell-sum", "--shell-inner", "3", "--samples", "2000"],
    ];
    for args in cases {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut one = args.to_vec();
        one.extend(["--threads", "1"]);
        let mut four = args.to_vec();
        four.extend(["--threads", "4"]);
        assert_eq!(run(&one, a.path()), 0, "{args:?}");
        assert_eq!(run(&four, b.path()), 0, "{args:?}");
        let (fa, fb) = (dir_bytes(a.path()), dir_bytes(b.path()));
        assert!(fa.len() >= 2);
        assert!(fa == fb, "{args:?}");
    }
}

#[test]
fn flow_restarts_from_a_field_dump() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["sample", "--d", "1", "--n", "4", "--samples", "10", "--dumps", "1", "--seed", "3"], dir.path()), 0);
    let dump = dir.path().join("field_000000.sgff");
    let flow_dir = dir.path().join("flow");
    let args = [
        "flow", "--initial-field", dump.to_str().unwrap(), "--interaction", "cubic", "--time", "0.1", "--dt", "1e-4",
    ];
    assert_eq!(run(&args, &flow_dir), 0);
    let s = summary(&flow_dir, "flow");
    assert_eq!(s["config"]["n"], 4);
    assert!(s["result"]["max_drift_h"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(flow_dir.join("flow.csv")).unwrap();
    assert!(csv.starts_with("t,h,mass,drift_h,drift_mass\n"));
    assert_eq!(csv.lines().count(), 1 + 1 + 100);

    // same datum regenerated from the seed gives the same trajectory
    let again = dir.path().join("again");
    let args = [
        "flow", "--d", "1", "--n", "4", "--seed", "3", "--interaction", "cubic", "--time", "0.1", "--dt", "1e-4",
    ];
    assert_eq!(run(&args, &again), 0);
    assert_eq!(
        std::fs::read(flow_dir.join("flow.csv")).unwrap(),
        std::fs::read(again.join("flow.csv")).unwrap()
    );
}

#[test]
fn tail_and_positivity_tables() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "tail", "--d", "2", "--n", "4", "--interaction", "wick-hartree", "--radius", "1", "--lambdas", "0,0.01,0.05",
        "--samples", "2000",
    ];
    assert_eq!(run(&args, dir.path()), 0);
    let csv = std::fs::read_to_string(dir.path().join("tail.csv")).unwrap();
    assert!(csv.starts_with("lambda,count,probability,std_error,ci_low,ci_high\n"));
    let probs: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(probs.windows(2).all(|w| w[1] <= w[0]));

    assert_eq!(run(&["positivity", "--d", "3", "--n", "4", "--samples", "5000"], dir.path()), 0);
    let s = summary(dir.path(), "positivity");
    let checks = s["result"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["positive"] == true));
    assert_eq!(run(&["positivity", "--d", "1"], dir.path()), 2);
}

#[test]
fn concentration_reports_a_positive_constant() {
    let dir = tempfile::tempdir().unwrap();
    for stat in ["shell-sum", "linear-form", "shift-matrix"] {
        let args = ["concentration", "--statistic", stat, "--shell-inner", "4", "--samples", "5000"];
        assert_eq!(run(&args, dir.path()), 0, "{stat}");
        let s = summary(dir.path(), "concentration");
        assert!(s["result"]["fitted_c"].as_f64().unwrap() > 0.0);
        assert_eq!(s["result"]["dominated"], true);
        let csv = std::fs::read_to_string(dir.path().join("concentration.csv")).unwrap();
        assert!(csv.starts_with("threshold,empirical,ci_low,ci_high,bound,fitted_c\n"));
    }
}
