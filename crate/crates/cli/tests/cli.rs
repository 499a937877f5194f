//! Command-line behaviour: flags, exit codes, file handling.

use std::path::Path;
use std::process::{Command, Output};

fn mtp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn crit_prints_gbs_values() {
    let out = mtp(&["crit", "--family", "gbs-beta", "--n", "3", "--alpha", "0.25"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("i,alpha_i\n"));
    // β_2 = 1/5.
    let beta2: f64 = text
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(beta2, 0.2);
}

#[test]
fn crit_su_delta_zero_is_scaled_linear() {
    let out = mtp(&[
        "crit", "--family", "su-delta", "--n", "50", "--alpha", "0.1", "--delta", "0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for (i, line) in text.lines().skip(1).enumerate() {
        let a: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((a - (i + 1) as f64 * 0.1 / 51.0).abs() < 1e-15);
    }
}

#[test]
fn crit_improved_first_value_is_the_floor() {
    let out = mtp(&["crit", "--family", "improved", "--n", "50", "--alpha", "0.1"]);
    assert!(out.status.success());
    let first: f64 = stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(first, 1.0 - 0.9f64.powf(1.0 / 50.0));
}

#[test]
fn crit_rejects_bad_params() {
    let out = mtp(&["crit", "--family", "gbs-beta", "--n", "0", "--alpha", "0.25"]);
    assert_eq!(out.status.code(), Some(1));
    let out = mtp(&["crit", "--family", "su-delta", "--n", "5", "--alpha", "0.2"]);
    assert_eq!(out.status.code(), Some(1)); // missing delta
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    let out = mtp(&["--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = mtp(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let out = mtp(&["run"]);
    assert_eq!(out.status.code(), Some(1)); // no config
}

#[test]
fn run_missing_config_file_exits_1() {
    let out = mtp(&["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_invalid_scenario_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    // n0 = 0 violates the standing assumption.
    std::fs::write(
        &cfg,
        r#"
estimands = ["fdr"]
[scenario]
n = 3
n0 = 0
n1 = 3
[scenario.model]
kind = "du"
[procedure]
kind = "step-down"
[schedule]
family = "gbs-beta"
alpha = 0.1
"#,
    )
    .unwrap();
    let out = mtp(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

fn write_du_config(path: &Path) {
    std::fs::write(
        path,
        r#"
reps = 5000
seed = 7
estimands = ["fdr"]
[scenario]
n = 8
n0 = 6
n1 = 2
[scenario.model]
kind = "du"
[procedure]
kind = "step-down"
[schedule]
family = "gbs-beta"
alpha = 0.1
"#,
    )
    .unwrap();
}

#[test]
fn run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("du.toml");
    write_du_config(&cfg);
    let out_path = dir.path().join("report.csv");
    let out = mtp(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("estimand,mean,se,reps,seed\n"));
    assert!(csv.contains("fdr,"));
    assert!(dir.path().join("report.csv.manifest.toml").exists());
}

#[test]
fn run_seed_flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("du.toml");
    write_du_config(&cfg);
    let a = mtp(&["run", "--config", cfg.to_str().unwrap()]);
    let b = mtp(&["run", "--config", cfg.to_str().unwrap(), "--seed", "8"]);
    assert!(stdout(&a).contains(",7\n"));
    assert!(stdout(&b).contains(",8\n"));
    assert_ne!(stdout(&a), stdout(&b));
}

#[test]
fn sweep_produces_long_format_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("du.toml");
    write_du_config(&cfg);
    let out = mtp(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "n0",
        "--values",
        "4..6",
        "--reps",
        "2000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4); // header + 3 points x 1 estimand
    assert!(text.lines().nth(1).unwrap().starts_with("n0,4"));
    // Empty axis yields just the header.
    let out = mtp(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "n0",
        "--values",
        "",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "axis,value,estimand,mean,se,reps,seed\n");
    // Unknown axis is a usage error.
    let out = mtp(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "gamma",
        "--values",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_identities_passes_and_detects_injected_fault() {
    let ok = mtp(&["check-identities", "--reps", "30000"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let text = stdout(&ok);
    assert!(text.starts_with("identity,scenario,lhs,rhs,residual_or_z,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));

    let bad = mtp(&[
        "check-identities",
        "--reps",
        "30000",
        "--perturb-beta2",
        "1e-3",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("fdr-decomposition"));
    assert!(stdout(&bad).contains(",false"));
}

#[test]
fn calibrate_writes_result_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("kappa.csv");
    let out = mtp(&[
        "calibrate",
        "--n",
        "10",
        "--alpha",
        "0.1",
        "--tol",
        "1e-4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let result = std::fs::read_to_string(&out_path).unwrap();
    assert!(result.starts_with("status,kappa,"));
    assert!(result.contains("converged"));
    let curve = std::fs::read_to_string(dir.path().join("kappa_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 11); // header + n1 = 0..9
    assert!(dir.path().join("kappa.csv.manifest.toml").exists());
}

#[test]
fn figure1_header_and_small_run() {
    let out = mtp(&["figure1", "--n", "6", "--alpha", "0.2", "--reps", "1000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n0,n1,exact_su,exact_sd,exact_sd_improved,"));
    assert_eq!(text.lines().count(), 7);
}
