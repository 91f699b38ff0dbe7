use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn matkern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matkern"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn circle_space() -> Value {
    json!({ "kind": "circle" })
}

#[test]
fn list_suites_names_every_suite() {
    let out = matkern(&["list-suites"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for (id, _) in matkern::harness::SUITES {
        assert!(text.contains(id), "missing {id}");
    }
}

#[test]
fn verify_passes_and_is_deterministic() {
    let run = || {
        matkern(&[
            "verify",
            "circle-example1",
            "--seed",
            "7",
            "--format",
            "json",
        ])
    };
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report = stdout_json(&a);
    assert_eq!(report["pass"], json!(true));
    assert_eq!(report["environment"]["seed"], json!(7));
    let parsed: matkern::harness::SuiteReport = serde_json::from_value(report).unwrap();
    assert_eq!(parsed.failures().count(), 0);
}

#[test]
fn text_format_is_human_readable() {
    let out = matkern(&["verify", "embed-check"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("embed-check"));
}

#[test]
fn failing_check_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &json!({ "tolerances": { "pd_tol": 0.5 } }),
    );
    let out = matkern(&[
        "verify",
        "circle-example1",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["pass"], json!(false));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        json!({ "n": 0 }),
        json!({ "schema_version": 99 }),
        json!({ "unknown_field": 1 }),
        json!({ "suite": "gaussian-example1" }),
    ];
    for (i, cfg) in cases.iter().enumerate() {
        let path = write(dir.path(), &format!("c{i}.json"), cfg);
        let out = matkern(&[
            "verify",
            "circle-example1",
            "--config",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "case {cfg}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(matkern(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(
        matkern(&["verify", "circle-example1", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn gram_of_counterexample_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let kernel = write(
        dir.path(),
        "k.json",
        &json!({
            "variant": "unitary",
            "base": { "space": circle_space(), "form": "circle_exp_cos" },
            "map": { "space": circle_space(), "action_kind": "circle_rotation", "parameters": { "angle": 1.0 } }
        }),
    );
    let points = write(dir.path(), "p.json", &json!([0.0, 1.0]));
    let out = matkern(&[
        "gram",
        "--kernel",
        kernel.to_str().unwrap(),
        "--points",
        points.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["dimension"], json!(4));
    assert_eq!(v["ell"], json!(2));
    assert_eq!(
        v["verdict"]["kind"],
        json!("PositiveSemidefiniteDegenerate")
    );
}

#[test]
fn gram_of_scalar_kernel_and_duplicate_points() {
    let dir = TempDir::new().unwrap();
    let kernel = write(
        dir.path(),
        "k.json",
        &json!({ "space": circle_space(), "form": "circle_exp_cos" }),
    );
    let good = write(dir.path(), "p.json", &json!([0.0, 1.0, 2.0]));
    let out = matkern(&[
        "gram",
        "--kernel",
        kernel.to_str().unwrap(),
        "--points",
        good.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout_json(&out)["verdict"]["kind"],
        json!("PositiveDefinite")
    );
    let dup = write(dir.path(), "d.json", &json!([0.0, 0.0]));
    let out = matkern(&[
        "gram",
        "--kernel",
        kernel.to_str().unwrap(),
        "--points",
        dup.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn orbit_of_translation() {
    let dir = TempDir::new().unwrap();
    let map = write(
        dir.path(),
        "m.json",
        &json!({ "space": { "kind": "euclidean", "dim": 1 }, "action_kind": "euclidean_translation", "parameters": { "offset": [1.0] } }),
    );
    let points = write(dir.path(), "p.json", &json!([[0.0], [1.0], [5.0]]));
    let out = matkern(&[
        "orbit",
        "--map",
        map.to_str().unwrap(),
        "--points",
        points.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["F"], json!([0]));
    assert_eq!(v["m"], json!(1));
    assert_eq!(v["p"], json!(2));
}

#[test]
fn fourier_roundtrip_through_cli() {
    let dir = TempDir::new().unwrap();
    let coeffs = write(
        dir.path(),
        "a.json",
        &json!({ "coefficients": [0.25, 0.5, 0.0, 1.0] }),
    );
    let out = matkern(&[
        "fourier",
        "synthesize",
        "--group",
        "2,2",
        "--input",
        coeffs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let synth = stdout_json(&out);
    assert_eq!(synth["strictly_positive_definite"], json!(false));
    let values = write(dir.path(), "v.json", &json!({ "values": synth["values"] }));
    let out = matkern(&[
        "fourier",
        "analyze",
        "--group",
        "2,2",
        "--input",
        values.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let back = stdout_json(&out);
    for (z, a) in back["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .zip([0.25, 0.5, 0.0, 1.0])
    {
        assert!((z[0].as_f64().unwrap() - a).abs() < 1e-12);
        assert!(z[1].as_f64().unwrap().abs() < 1e-12);
    }
    assert_eq!(back["strictly_positive_definite"], json!(false));
}
