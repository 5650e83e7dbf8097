use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_yamabe-lab"))
}

#[test]
fn compute_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["compute", "--model", "schoen_product", "--n", "3", "--L", "20", "--lambda", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], yamabe_lab::cli::ESTIMATE_CSV_HEADER);
    assert!(lines[1].starts_with("schoen_product,3,1,1,0,"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn sweep_tsv_has_21_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep", "--model", "hemisphere", "--n", "3", "--lambda-grid", "0:1:0.05", "--mesh-nodes", "129", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let tsv = std::fs::read_to_string(dir.path().join("hemisphere_lambda_sweep.tsv")).unwrap();
    let mut lines = tsv.lines();
    assert_eq!(lines.next(), Some("x\tY\tresidual"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split('\t').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.len() == 3 && r.iter().all(|v| v.is_finite())));
    assert_eq!(rows[20][0], 1.0);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "schoen_product L=5\nfibre=2\n").unwrap();
    let out = bin().arg("compute").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2:1") && err.contains("fiber_quotient_order"), "{err}");

    let out = bin().args(["compute", "--model", "hemisphere", "--lambda", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["compute", "--model", "round_sphere", "--lambda", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_model_file_is_an_execution_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["compute", "--model-file", "/nonexistent/model.toml", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["verify", "--suite", "cut", "--n", "3", "--mesh-nodes", "129", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(yamabe_lab::harness::CSV_HEADER));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = yamabe_lab::geometry::hemisphere(3).unwrap();
    let path = dir.path().join("hemi.toml");
    std::fs::write(&path, yamabe_lab::geometry::model_to_text(&m)).unwrap();
    let out = bin()
        .args(["compute", "--lambda", "1", "--refinement-levels", "1", "--model-file"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let value: f64 = csv.lines().nth(1).unwrap().split(',').nth(6).unwrap().parse().unwrap();
    // round hemisphere at λ = 1: 6·(volume 2π²/2)^{2/3} = 6·π^{4/3}
    let expect = 6.0 * std::f64::consts::PI.powf(4.0 / 3.0);
    assert!((value - expect).abs() < 1e-6 * expect, "{value} vs {expect}");
}
