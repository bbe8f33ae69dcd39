//! End-to-end checks of the command-line interface: output determinism
//! across thread counts, file emission, and the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kuo-stab"))
}

fn run(args: &[&str], threads: &str) -> Output {
    bin()
        .args(args)
        .env("KUO_STAB_THREADS", threads)
        .output()
        .expect("binary runs")
}

#[test]
fn eigen_output_is_thread_count_independent() {
    let args = ["eigen", "--beta", "0.5", "--c", "-0.7", "--nmax", "3"];
    let a = run(&args, "1");
    let b = run(&args, "2");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn contour_output_is_thread_count_independent() {
    let args = [
        "contour",
        "--beta-range",
        "0:2:3",
        "--ctilde-range",
        "-0.5:0.5:4",
    ];
    let a = run(&args, "1");
    let b = run(&args, "3");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // byte-identical on repeat as well
    let c = run(&args, "1");
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn csv_uses_lf_and_fixed_precision() {
    let out = run(&["eigen", "--beta", "0.5", "--c", "-0.7"], "1");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,lambda,est_error");
    // numbers carry 9 significant digits
    let first = lines.next().unwrap();
    assert!(first.starts_with("1,"), "{first}");
    let lambda = first.split(',').nth(1).unwrap();
    assert!(lambda.contains('.') && lambda.contains('e'), "{lambda}");
    assert_eq!(lambda.split('.').nth(1).unwrap().split('e').count(), 2);
}

#[test]
fn json_format_round_trips() {
    let out = run(
        &["eigen", "--beta", "0.5", "--c", "-0.7", "--format", "json"],
        "1",
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"][0], "n");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn out_flag_writes_file_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eig.csv");
    let out = run(
        &[
            "eigen",
            "--beta",
            "0.5",
            "--c",
            "-0.7",
            "--out",
            path.to_str().unwrap(),
            "--emit-plot",
        ],
        "1",
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,lambda,est_error\n"));
    let script = std::fs::read_to_string(dir.path().join("eig.gp")).unwrap();
    assert!(script.contains("set datafile separator ','"));
}

#[test]
fn exit_codes_follow_contract() {
    let code = |args: &[&str]| run(args, "1").status.code().unwrap();
    // usage errors: missing speed, conflicting speeds, unknown suite
    assert_eq!(code(&["eigen", "--beta", "0.5"]), 2);
    assert_eq!(code(&["eigen", "--beta", "0.5", "--c", "-0.7", "--c-inf"]), 2);
    assert_eq!(code(&["verify", "--suite", "bogus"]), 2);
    // numeric error: real speed inside the range of U is singular
    assert_eq!(code(&["eigen", "--beta", "0.5", "--c", "0.5"]), 3);
    // success
    assert_eq!(code(&["verify", "--suite", "specfun"]), 0);
}

#[test]
fn regular_speed_gets_closed_form_column() {
    // at c = U_beta the closed-form column must appear and agree
    let profile = kuo_stab_core::sinus_profile();
    let ub = profile.u_beta(0.5).unwrap();
    let ub_arg = format!("{ub}");
    let out = run(&["eigen", "--beta", "0.5", "--c-ubeta", "--nmax", "2"], "1");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("n,lambda,est_error,closed_form\n"), "{text}");
    // passing the same speed numerically must match the dedicated flag
    let explicit = run(&["eigen", "--beta", "0.5", "--c", &ub_arg, "--nmax", "2"], "1");
    assert_eq!(out.stdout, explicit.stdout);
    assert!(Path::new(env!("CARGO_BIN_EXE_kuo-stab")).exists());
}
