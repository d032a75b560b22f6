use std::fs;
use std::process::Command;

use pointdisp::cli::run;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, Value, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["pointdisp"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    let json = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, json, String::from_utf8(err).unwrap())
}

#[test]
fn spectrum_reports_the_bound_state() {
    let (code, v, _) = call(&["spectrum", "--alpha", "-1"]);
    assert_eq!(code, 0);
    let ev = v["result"]["eigenvalues"][0].as_f64().unwrap();
    assert!((ev + 157.913_670_417_429_74).abs() < 1e-8, "{ev}");
    assert_eq!(v["manifest"]["schema_version"], 1);
    assert_eq!(v["manifest"]["subcommand"], "spectrum");
}

#[test]
fn unknown_subcommand_prints_usage() {
    let (code, _, err) = call(&["frobnicate"]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_pointdisp");
    let ok = Command::new(bin).args(["spectrum", "--alpha", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["result"]["eigenvalues"].as_array().unwrap().len(), 0);
    let bad = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn config_file_drives_the_interaction() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.toml");
    fs::write(&path, "centers = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]\nstrengths = [-0.5, -0.5]\n").unwrap();
    let (code, v, _) = call(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(!v["result"]["eigenvalues"].as_array().unwrap().is_empty());

    fs::write(&path, "centers = [[0.0, 0.0, 0.0]]\nstrengths = [1.0]\nbogus = 3\n").unwrap();
    let (code, _, err) = call(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("config"), "{err}");
}

#[test]
fn bundles_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pitt");
    let args = ["pitt", "--p", "5/3", "--q", "5/2", "--count", "4", "--levels", "1", "--seed", "9", "--out", out.to_str().unwrap()];
    let read = || {
        let mut files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|f| (f.clone(), fs::read(f).unwrap())).collect::<Vec<_>>()
    };
    assert_eq!(call(&args).0, 0);
    let first = read();
    assert_eq!(call(&args).0, 0);
    assert_eq!(first, read());
    let names: Vec<String> = first.iter().map(|(p, _)| p.file_name().unwrap().to_string_lossy().into()).collect();
    assert_eq!(names, ["manifest.json", "pitt.json", "pitt_ratios.csv"]);
    let csv = String::from_utf8(first[2].1.clone()).unwrap();
    assert!(csv.starts_with("index,kind,ratio\n"));
}

#[test]
fn pitt_above_three_reports_growth() {
    let (code, v, _) = call(&["pitt", "--q", "7/2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["regime"], "unbounded");
    assert!(v["result"]["growth"].as_f64().unwrap() > 1.0);
    let (code, _, err) = call(&["pitt", "--p", "5/3", "--q", "3"]);
    assert_eq!(code, 1);
    assert!(err.contains("dual"), "{err}");
}

#[test]
fn checks_pass_and_fail_with_codes() {
    let (code, v, _) = call(&["resolvent-check", "--alpha", "0.5", "--count", "2", "--seed", "3"]);
    assert_eq!(code, 0);
    assert!(v["result"]["residual"].as_f64().unwrap() < 1e-6);
    let (code, _, _) = call(&["resolvent-check", "--alpha", "0.5", "--count", "1", "--tolerance", "1e-30"]);
    assert_eq!(code, 2);
    let (code, v, _) = call(&["bethe-peierls", "--alpha", "2"]);
    assert_eq!(code, 0, "{v}");
    let (code, _, _) = call(&["oracle-compare"]);
    assert_eq!(code, 0);
}

#[test]
fn decay_fit_explicit_pair() {
    let args = ["decay-fit", "--alpha", "1", "--q", "2", "--t-max-exp", "3", "--width2", "1", "--projection", "full"];
    let (code, v, _) = call(&args);
    assert_eq!(code, 0, "{v}");
    assert!(v["result"]["slope"].as_f64().unwrap().abs() < 0.01);
    assert_eq!(v["result"]["preset"]["name"], "CUSTOM");
    let (code, _, err) = call(&["decay-fit", "--preset", "PRESET-99"]);
    assert_eq!(code, 1);
    assert!(err.contains("PRESET-99"));
}

#[test]
fn evolve_and_norm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, v, _) = call(&["evolve", "--alpha", "-1", "--t", "0.5,1", "--out", out]);
    assert_eq!(code, 0);
    let runs = v["result"]["runs"].as_array().unwrap();
    for r in runs {
        let (a, b) = (r["l2_initial"].as_f64().unwrap(), r["l2_final"].as_f64().unwrap());
        assert!((a - b).abs() < 1e-4 * a);
    }
    let csv = fs::read_to_string(dir.path().join("evolve_t0.5.csv")).unwrap();
    assert!(csv.starts_with("r,re_u,im_u\n"));

    let (code, v, _) = call(&["norm", "--profile", "bound-state", "--param", "-1", "--exponent", "2"]);
    assert_eq!(code, 0);
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let (code, v, _) = call(&["norm", "--profile", "green", "--exponent", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["refinement"]["divergent"], true);
}
