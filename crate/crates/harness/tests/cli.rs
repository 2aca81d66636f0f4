//! End-to-end checks of the command-line interface: exit codes, output
//! files, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn fraclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(args)
        .env("FRACLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

#[test]
fn catalog_lists_functions_and_weights() {
    let out = fraclab(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let functions = text
        .lines()
        .skip_while(|l| !l.starts_with("functions:"))
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .count();
    let weights = text
        .lines()
        .skip_while(|l| !l.starts_with("weights:"))
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .count();
    assert!(functions >= 7, "{functions} functions listed");
    assert!(weights >= 4, "{weights} weights listed");
}

#[test]
fn missing_config_exits_with_one() {
    let out = fraclab(&["sweep", "--config", "definitely-missing.conf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_flags_exit_with_one() {
    let out = fraclab(&["frac-deriv", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = fraclab(&["frac-deriv", "--fn", "gaussian", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = fraclab(&["frac-deriv", "--fn", "nonsense", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn divergent_request_is_a_domain_error() {
    // the order -alpha integral of a constant diverges
    let out = fraclab(&["frac-deriv", "--fn", "constant(1)", "--alpha", "0.5", "--weyl"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn frac_deriv_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = fraclab(&[
        "frac-deriv",
        "--fn",
        "gaussian",
        "--alpha",
        "0.5",
        "--grid-min",
        "-4",
        "--grid-max",
        "4",
        "--grid-points",
        "17",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,value,error_estimate"));
    assert_eq!(text.lines().count(), 18);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("exp.conf");
    std::fs::write(
        &conf,
        "[experiment]\nkind = deriv_limits\nfunction = gaussian\nweight = exp_decay(1)\n\
         p = 2\norders = 0.5, 0.9\nseed = 7\n[grid]\nmin = -6\nmax = 6\npoints = 25\n\
         window_min = -4\nwindow_max = 4\n",
    )
    .unwrap();
    let run = |tag: &str| -> String {
        let path = dir.path().join(format!("{tag}.csv"));
        let out = fraclab(&[
            "sweep",
            "--config",
            conf.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read_to_string(&path).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b, "two identical invocations must agree byte for byte");
    assert!(a.starts_with("order,metric,value,error_estimate"));
}

#[test]
fn weights_check_emits_probe_rows() {
    let out = fraclab(&[
        "weights", "check", "--weight", "exp_decay(1)", "--p", "2", "--side", "minus",
        "--jmin", "-3", "--jmax", "3", "--grid-points", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("a,h,product"));
    // 5 centers x 7 scales
    assert_eq!(text.lines().count(), 36);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("max product"), "stderr: {stderr}");
}

#[test]
fn maximal_csv_has_argmax_column() {
    let out = fraclab(&[
        "maximal", "--op", "mminus", "--fn", "indicator", "--grid-min", "-4", "--grid-max",
        "4", "--grid-points", "33",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,value,argmax_scale"));
}

#[test]
fn sweep_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("exp.conf");
    std::fs::write(
        &conf,
        "[experiment]\nkind = weight_scan\nfunction = gaussian\nweight = power(0.5)\np = 2\n\
         orders = 0.5\n[grid]\nmin = -4\nmax = 4\npoints = 9\nwindow_min = -2\nwindow_max = 2\n",
    )
    .unwrap();
    let out = fraclab(&["sweep", "--config", conf.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let report = fraclab_harness::SweepReport::from_json(&text).unwrap();
    assert_eq!(report.to_json().unwrap(), text.trim_end_matches('\n'));
    assert!(Path::new(conf.to_str().unwrap()).exists());
}

#[test]
fn bad_thread_env_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(["catalog"])
        .env("FRACLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
