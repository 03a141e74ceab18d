use std::ffi::OsStr;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn run<S: AsRef<OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conebary"))
        .args(args)
        .current_dir(data_dir())
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

/// Flattens numbers, arrays and `{"entries": …}` matrices into a list.
fn numbers(v: &Value) -> Vec<f64> {
    match v {
        Value::Number(n) => vec![n.as_f64().unwrap()],
        Value::Array(items) => items.iter().flat_map(numbers).collect(),
        Value::Object(map) if map.contains_key("entries") => numbers(&map["entries"]),
        other => panic!("not numeric: {other}"),
    }
}

#[test]
fn goldens() {
    let mut checked = 0;
    for entry in fs::read_dir(data_dir().join("golden")).unwrap() {
        let path = entry.unwrap().path();
        let golden: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let args: Vec<String> = golden["args"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| a.as_str().unwrap().to_owned())
            .collect();
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            golden["exit_code"].as_i64().map(|c| c as i32),
            "{name}: stderr {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report = json(&out);
        if let Some(kind) = golden.get("error_kind") {
            assert_eq!(&report["error_kind"], kind, "{name}");
        }
        for (field, spec) in golden["fields"].as_object().into_iter().flatten() {
            let got = numbers(&report[field]);
            if let Some(max) = spec.get("max") {
                let max = max.as_f64().unwrap();
                assert!(
                    got.iter().all(|&x| x <= max),
                    "{name}: {field} = {got:?} exceeds {max}"
                );
            } else {
                let want = numbers(&spec["value"]);
                let tol = spec["tol"].as_f64().unwrap();
                assert_eq!(got.len(), want.len(), "{name}: {field} shape");
                for (g, w) in got.iter().zip(&want) {
                    assert!(
                        (g - w).abs() <= tol,
                        "{name}: {field} = {got:?}, expected {want:?} ± {tol}"
                    );
                }
            }
        }
        checked += 1;
    }
    assert!(checked >= 6, "only {checked} goldens found");
}

#[test]
fn malformed_matrix_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"dim": 2, "entries": [[1.0, 0.0], [0.0]]}"#).unwrap();
    let out = run(&[
        OsStr::new("dist"),
        bad.as_os_str(),
        OsStr::new("identity2.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("entries[1]"), "stderr: {stderr}");
    assert!(stderr.contains("bad.json"), "stderr: {stderr}");
}

#[test]
fn not_json_and_missing_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("garbage.json");
    fs::write(&bad, "{not json").unwrap();
    assert_eq!(
        run(&[OsStr::new("dist"), bad.as_os_str(), bad.as_os_str()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["rep-size", "no_such_file.json"]).status.code(),
        Some(2)
    );
    // a tuple file is not a matrix
    assert_eq!(
        run(&["dist", "tuple_2x2.json", "identity2.json"])
            .status
            .code(),
        Some(2)
    );
    // dimension clash between representation and unitariser
    assert_eq!(
        run(&["verify", "z_rotation.json", "identity3.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn geodesic_midpoint_of_identity_and_diagonal() {
    let report = json(&run(&[
        "geodesic",
        "identity2.json",
        "diag_e2_einv.json",
        "--t",
        "0.5",
    ]));
    let got = numbers(&report["point"]);
    let want = [1f64.exp(), 0.0, 0.0, (-0.5f64).exp()];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-10, "{got:?}");
    }
}

#[test]
fn barycenter_csv_records_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rounds.csv");
    let out = run(&[
        OsStr::new("barycenter"),
        OsStr::new("tuple_2x2.json"),
        OsStr::new("--csv"),
        csv_path.as_os_str(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["round", "tuple_diam"]);
    let diams: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert!(diams.len() > 3);
    // a 4-tuple contracts by at least 1/3 per round
    for w in diams.windows(2) {
        assert!(w[1] <= w[0] / 3.0 + 1e-9, "{diams:?}");
    }
    let report = json(&out);
    assert_eq!(report["rounds"].as_u64().unwrap() as usize + 1, diams.len());
}

#[test]
fn unitarise_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("history.csv");
    let out_path = dir.path().join("report.json");
    let args: Vec<std::ffi::OsString> = vec![
        "unitarise".into(),
        "z_rotation.json".into(),
        "--group".into(),
        "z".into(),
        "--csv".into(),
        csv_path.clone().into(),
    ];
    let stdout_run = run(&args);
    assert_eq!(stdout_run.status.code(), Some(0));
    let mut with_out = args.clone();
    with_out.extend(["--out".into(), out_path.clone().into_os_string()]);
    let file_run = run(&with_out);
    assert_eq!(file_run.status.code(), Some(0));
    assert!(file_run.stdout.is_empty());
    assert_eq!(fs::read(&out_path).unwrap(), stdout_run.stdout);

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["n", "residual", "size", "distance"]
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    let report = json(&stdout_run);
    assert_eq!(rows.len(), report["history"].as_array().unwrap().len());
    assert!(rows.last().unwrap()[1] <= 1e-6);
}

#[test]
fn verify_certificate_controls_exit_code() {
    let ok = run(&["verify", "z_rotation.json", "s0.json"]);
    assert_eq!(ok.status.code(), Some(0));
    let report = json(&ok);
    assert!(report["max_defect"].as_f64().unwrap() < 1e-12);
    let failing = run(&["verify", "z_rotation.json", "s0.json", "--alpha", "0.1"]);
    assert_eq!(failing.status.code(), Some(1));
    // the identity does not unitarise a non-unitary representation
    assert_eq!(
        run(&["verify", "z_rotation.json", "identity2.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn rep_size_reports_plateau() {
    let bounded = json(&run(&["rep-size", "z_rotation.json"]));
    assert_eq!(bounded["uniformly_bounded"], Value::Bool(true));
    let unbounded = json(&run(&["rep-size", "unbounded.json"]));
    assert_eq!(unbounded["uniformly_bounded"], Value::Bool(false));
    let diam = json(&run(&["rep-diam", "c2xc2.json"]));
    let (d, two_ln) = (
        diam["diam"].as_f64().unwrap(),
        diam["two_ln_size"].as_f64().unwrap(),
    );
    assert!((d - two_ln).abs() < 1e-8);
}

#[test]
fn interpolation_shrinks_size() {
    let report = json(&run(&[
        "interpolate",
        "z_rotation.json",
        "s0.json",
        "--t",
        "0.5",
    ]));
    let size = report["size"].as_f64().unwrap();
    let original = report["original_size"].as_f64().unwrap();
    assert!(
        size <= original.sqrt() * (1.0 + 1e-6),
        "{size} vs {original}"
    );
}

#[test]
fn seeded_runs_are_byte_identical() {
    for args in [
        &["barycenter", "tuple_2x2.json", "--seed", "11"][..],
        &["unitarise", "c2xc2.json"][..],
        &["circumcenter", "tuple_2x2.json"][..],
    ] {
        let (a, b) = (run(args), run(args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}
