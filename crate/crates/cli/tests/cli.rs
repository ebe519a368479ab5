use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gensic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gensic"))
        .args(args)
        .env_remove("GENSIC_TOLERANCE")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn build(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut all = vec!["construct"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let o = gensic(&all);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_sic_writes_four_outcomes() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "sic2.json", &["--family", "sic", "--dim", "2"]);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(file["dim"], 2);
    assert_eq!(file["outcomes"].as_array().unwrap().len(), 4);
}

#[test]
fn construct_prints_trimmed_purity() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.json");
    let o = gensic(&[
        "construct",
        "--family",
        "gen-sic-depol",
        "--dim",
        "2",
        "--x",
        "0.5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).lines().any(|l| l == "average purity 0.625"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn construct_rejects_composite_mub_dimension() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.json");
    let o = gensic(&[
        "construct",
        "--family",
        "mub",
        "--dim",
        "4",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("dimension must be prime"));
    assert!(!out.exists());
}

#[test]
fn missing_and_unknown_flags_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.json");
    assert_eq!(
        code(&gensic(&[
            "construct",
            "--family",
            "gen-sic-depol",
            "--dim",
            "2",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(code(&gensic(&["classify", "--in", "x.json", "--bogus"])), 2);
    assert_eq!(
        code(&gensic(&["audit", "--in", "x.json", "--theorem", "3"])),
        2
    );
}

#[test]
fn classify_sic_and_cube() {
    let dir = TempDir::new().unwrap();
    let sic = build(&dir, "sic2.json", &["--family", "sic", "--dim", "2"]);
    let v = json(&gensic(&["classify", "--in", s(&sic), "--json"]));
    assert_eq!(v["is_balanced"], true);
    assert_eq!(v["is_generalized_sic"], true);
    assert!(v["residuals"]["tight_ic"].as_f64().unwrap() < 1e-10);

    let cube = build(&dir, "cube.json", &["--family", "cube"]);
    let v = json(&gensic(&["classify", "--in", s(&cube), "--json"]));
    assert_eq!(v["is_tight_ic"], true);
    assert_eq!(v["is_balanced"], false);
    assert_eq!(v["quasi_balance_method"], "sampled");

    let table = stdout(&gensic(&["classify", "--in", s(&cube)]));
    assert!(table
        .lines()
        .any(|l| l.starts_with("balanced") && l.ends_with("false")));
}

#[test]
fn incomplete_measurement_is_invalid_input() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dim":2,"label":"bad","outcomes":[[[[0.6,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]}"#,
    )
    .unwrap();
    let o = gensic(&["classify", "--in", s(&path)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("HS norm 4.000e-1"), "{}", stderr(&o));
}

#[test]
fn unparsable_file_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(code(&gensic(&["classify", "--in", s(&path)])), 2);
}

#[test]
fn round_trip_reproduces_in_memory_verdicts() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &[&str], gensic::Povm); 3] = [
        (
            "simplex.json",
            &["--family", "gen-sic-simplex", "--dim", "3", "--seed", "5"],
            gensic::measurements::generalized_sic_simplex(3, 5).unwrap(),
        ),
        (
            "random.json",
            &["--family", "random", "--dim", "3", "--seed", "2"],
            gensic::measurements::random_minimal_ic(3, 2).unwrap(),
        ),
        (
            "mub.json",
            &["--family", "mub", "--dim", "3"],
            gensic::measurements::mub_complete(3).unwrap(),
        ),
    ];
    for (name, args, povm) in cases {
        let path = build(&dir, name, args);
        let v = json(&gensic(&["classify", "--in", s(&path), "--json"]));
        let d = gensic::tomo::classify(&povm).unwrap();
        for (key, expected) in [
            ("is_ic", d.is_ic),
            ("is_minimal", d.is_minimal),
            ("is_tight_ic", d.is_tight_ic),
            ("is_quasi_balanced", d.is_quasi_balanced),
            ("is_balanced", d.is_balanced),
            ("is_generalized_sic", d.is_generalized_sic),
        ] {
            assert_eq!(v[key], expected, "{name} {key}");
        }
    }
}

#[test]
fn simulate_sic_pure_state() {
    let dir = TempDir::new().unwrap();
    let sic = build(&dir, "sic2.json", &["--family", "sic", "--dim", "2"]);
    let o = gensic(&[
        "simulate",
        "--in",
        s(&sic),
        "--state",
        "pure",
        "--shots",
        "100000",
        "--reps",
        "100",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!((v["analytic_scaled_mse"].as_f64().unwrap() - 4.0).abs() < 1e-10);
    assert_eq!(v["within_3_sigma"], true);
    assert_eq!(v["experiment"]["shots"], 100000);
    assert_eq!(v["per_repetition"].as_array().unwrap().len(), 100);
}

#[test]
fn simulate_mub_with_optimal_reconstruction() {
    let dir = TempDir::new().unwrap();
    let mub = build(&dir, "mub2.json", &["--family", "mub", "--dim", "2"]);
    let o = gensic(&[
        "simulate",
        "--in",
        s(&mub),
        "--state",
        "pure",
        "--optimal",
        "--shots",
        "20000",
        "--reps",
        "50",
    ]);
    let v = json(&o);
    assert!((v["analytic_scaled_mse"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(v["experiment"]["reconstruction"], "optimal");
}

#[test]
fn single_shot_single_rep_still_runs() {
    let dir = TempDir::new().unwrap();
    let sic = build(&dir, "sic2.json", &["--family", "sic", "--dim", "2"]);
    let o = gensic(&["simulate", "--in", s(&sic), "--shots", "1", "--reps", "1"]);
    assert!(matches!(code(&o), 0 | 1));
    assert_eq!(json(&o)["standard_error"], 0.0);
}

#[test]
fn simulate_from_state_file_as_csv() {
    let dir = TempDir::new().unwrap();
    let sic = build(&dir, "sic2.json", &["--family", "sic", "--dim", "2"]);
    let state = dir.path().join("rho.json");
    std::fs::write(
        &state,
        r#"{"dim":2,"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#,
    )
    .unwrap();
    let o = gensic(&[
        "simulate",
        "--in",
        s(&sic),
        "--state",
        "file",
        "--state-file",
        s(&state),
        "--shots",
        "1000",
        "--reps",
        "20",
        "--csv",
    ]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("d,label,purity,N,R,empirical,stderr,analytic")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..2], &["2", "sic-d2"]);
    assert_eq!(&row[3..5], &["1000", "20"]);
    assert!((row[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!((row[7].parse::<f64>().unwrap() - 4.5).abs() < 1e-10);
}

#[test]
fn mse_reports_all_three_values() {
    let dir = TempDir::new().unwrap();
    let mub = build(&dir, "mub3.json", &["--family", "mub", "--dim", "3"]);
    let v = json(&gensic(&["mse", "--in", s(&mub), "--state", "mixed"]));
    let tr_rho2 = 1.0 / 3.0;
    assert!((v["optimal_scaled_mse"].as_f64().unwrap() - (12.0 - 4.0 * tr_rho2)).abs() < 1e-9);
    assert!(v["scaled_mse"].as_f64().unwrap() >= v["optimal_scaled_mse"].as_f64().unwrap() - 1e-9);
}

#[test]
fn sweep_writes_csv_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = gensic(&[
        "sweep",
        "--family",
        "gen-sic-depol",
        "--dim",
        "2",
        "--from",
        "0.5",
        "--to",
        "1.0",
        "--steps",
        "3",
        "--state",
        "mixed",
        "--shots",
        "2000",
        "--reps",
        "40",
        "--out",
        s(&out),
    ]);
    assert!(matches!(code(&o), 0 | 1), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "d,label,purity,N,R,empirical,stderr,analytic");
    let first: Vec<&str> = lines[1].split(',').collect();
    assert!((first[2].parse::<f64>().unwrap() - 0.625).abs() < 1e-12);
    assert!((first[7].parse::<f64>().unwrap() - 18.0).abs() < 1e-9);
}

#[test]
fn audits_exit_zero_when_consistent() {
    let dir = TempDir::new().unwrap();
    let gen = build(
        &dir,
        "gen.json",
        &["--family", "gen-sic-simplex", "--dim", "3", "--seed", "1"],
    );
    let o = gensic(&["audit", "--in", s(&gen), "--theorem", "4"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["antisymmetry"]["violation"].as_f64().unwrap() < 1e-8);
    assert!(v["generalized_sic_residual"].as_f64().unwrap() < 1e-8);

    let o = gensic(&["audit", "--in", s(&gen), "--theorem", "mse-bound"]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["gap"].as_f64().unwrap().abs() < 1e-9);

    let random = build(
        &dir,
        "r.json",
        &["--family", "random", "--dim", "3", "--seed", "4"],
    );
    let o = gensic(&["audit", "--in", s(&random), "--theorem", "balanced"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["is_balanced"], false);
    assert_eq!(v["is_generalized_sic"], false);
}

#[test]
fn audit_on_non_minimal_is_invalid_input() {
    let dir = TempDir::new().unwrap();
    let mub = build(&dir, "mub2.json", &["--family", "mub", "--dim", "2"]);
    assert_eq!(
        code(&gensic(&["audit", "--in", s(&mub), "--theorem", "2"])),
        3
    );
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let sic = build(&dir, "sic2.json", &["--family", "sic", "--dim", "2"]);
    let o = Command::new(env!("CARGO_BIN_EXE_gensic"))
        .args(["classify", "--in", s(&sic), "--json"])
        .env("GENSIC_TOLERANCE", "1e-3")
        .output()
        .unwrap();
    assert_eq!(json(&o)["threshold"], 1e-3);
    let o = Command::new(env!("CARGO_BIN_EXE_gensic"))
        .args(["classify", "--in", s(&sic)])
        .env("GENSIC_TOLERANCE", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn lie_check_exports_tensor() {
    let dir = TempDir::new().unwrap();
    let sic = build(&dir, "sic2.json", &["--family", "sic", "--dim", "2"]);
    let tensor = dir.path().join("t.json");
    let v = json(&gensic(&[
        "lie-check",
        "--in",
        s(&sic),
        "--export",
        s(&tensor),
    ]));
    assert_eq!(v["antisymmetry"]["antisymmetric"], true);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(tensor).unwrap()).unwrap();
    assert_eq!(t["shape"], serde_json::json!([4, 4, 4]));
    assert_eq!(t["entries"].as_array().unwrap().len(), 64);
}
