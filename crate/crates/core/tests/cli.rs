use std::path::PathBuf;
use std::process::Command;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fermilab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = fermilab::cli::run(std::iter::once("fermilab").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fermilab")).args(args).output().unwrap()
}

#[test]
fn singtable_prints_the_first_rows() {
    let dir = scratch("singtable");
    let (code, out) = run(&["--out", dir.to_str().unwrap(), "singtable", "--max", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("20pi m=2: -2,-1,0,2 | -3,-1,0,1"), "{out}");
    let csv = std::fs::read_to_string(dir.join("singtable.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn tau_reduce_prints_the_reduced_class() {
    let (code, out) = run(&["tau", "reduce", "--tau", "5+0.3i"]);
    assert_eq!(code, 0);
    assert!(out.contains("3.333333i"), "{out}");
}

#[test]
fn negative_complex_arguments_parse() {
    let (code, out) = run(&["tau", "reduce", "--tau", "-0.4+1.2i"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn clifford_pairing_and_residue_agree() {
    let dir = scratch("willmore");
    let cfg = configs().join("clifford.json");
    let (code, _) = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "willmore",
        "--methods",
        "pairing,residue",
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("willmore.csv")).unwrap();
    let values: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 2, "{csv}");
    assert!((values[0] / values[1] - 1.0).abs() < 0.01, "{csv}");
    assert!((values[0] - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-6);
}

#[test]
fn repeated_runs_write_identical_tables() {
    let cfg = configs().join("eta_pair.json");
    let mut files = Vec::new();
    for i in 0..2 {
        let dir = scratch(&format!("repeat{i}"));
        let (code, _) = run(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "fermi-slice", "--xp", "0.1+0.2i,-0.3"]);
        assert_eq!(code, 0);
        files.push(std::fs::read(dir.join("fermi_slice.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn unknown_config_key_reports_json() {
    let dir = scratch("badkey");
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, r#"{"potential": {"coefficients": []}, "cutof": 3}"#).unwrap();
    let out = binary(&["--config", cfg.to_str().unwrap(), "handles"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("cutof"), "{err}");
}

#[test]
fn malformed_complex_is_a_usage_error() {
    let out = binary(&["tau", "reduce", "--tau", "1+xi"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(serde_json::from_slice::<serde_json::Value>(&out.stderr).is_ok());
}

#[test]
fn zero_potential_handle_table_is_header_only() {
    let dir = scratch("empty");
    let cfg = dir.join("zero.json");
    std::fs::write(&cfg, r#"{"potential": {"coefficients": []}, "cutoff": 2}"#).unwrap();
    let (code, _) = run(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "handles"]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("handles.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "{csv}");
    assert!(csv.ends_with('\n'));
}
