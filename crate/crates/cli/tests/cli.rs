use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const THREE_COMPONENTS: &str = r#"{"phi": 0.1, "atoms": [{"s": 10, "weight": 0.1}, {"s": 5, "weight": 0.1},
    {"s": 1.5, "weight": 0.5}, {"s": 1, "weight": 0.3}], "dims": {"M": 100, "Mhat": 100, "N": 1000}}"#;

fn covlaws(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covlaws"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("COVLAWS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn identity_config(dir: &Path, extra: &str) -> String {
    config(
        dir,
        "identity.json",
        &format!(
            r#"{{"schema_version": 1, "trials": 2, "seed": 5{extra},
               "model": {{"phi": 0.5, "atoms": [{{"s": 1, "weight": 1}}], "dims": {{"M": 100, "Mhat": 100, "N": 200}}}}}}"#
        ),
    )
}

#[test]
fn edges_of_marchenko_pastur() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "mp.json", r#"{"schema_version": 1, "model": {"phi": 0.25, "atoms": [{"s": 1, "weight": 1}]}}"#);
    let out = covlaws(dir.path(), &["edges", "--config", &cfg]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = stdout.lines().filter_map(|l| l.split(" = ").nth(1)?.parse().ok()).collect();
    assert_eq!(values.len(), 2, "{stdout}");
    assert!((values[0] - 2.25).abs() < 1e-10 && (values[1] - 0.25).abs() < 1e-10);
}

#[test]
fn three_component_density_has_three_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "three.json", &format!(r#"{{"schema_version": 1, "model": {THREE_COMPONENTS}}}"#));
    assert!(covlaws(dir.path(), &["density", "--config", &cfg]).status.success());
    let csv = read(dir.path(), "density.csv");
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (e, r) = l.split_once(',').unwrap();
            (e.parse().unwrap(), r.parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0));
    let mut runs = 0;
    let mut inside = false;
    for &(_, rho) in &rows {
        if rho > 1e-9 && !inside {
            runs += 1;
        }
        inside = rho > 1e-9;
    }
    assert_eq!(runs, 3);
    let svg = read(dir.path(), "density.svg");
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    let edges: Value = serde_json::from_str(&read(dir.path(), "edges.json")).unwrap();
    assert_eq!(edges["edges"].as_array().unwrap().len(), 6);
    assert_eq!(edges["gamma"].as_array().unwrap().len(), 100);
}

#[test]
fn corrupted_equivalents_fail_the_assertion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = identity_config(dir.path(), "");
    let out = covlaws(dir.path(), &["verify-local-law", "--config", &cfg, "--assert", "--corrupt-m", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn honest_scan_passes_configured_bands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = identity_config(dir.path(), r#", "thresholds": {"aniso_ratio_max": 50, "avg_ratio_max": 20}"#);
    let out = covlaws(dir.path(), &["verify-local-law", "--config", &cfg, "--assert"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = read(dir.path(), "error_scan.csv");
    assert!(csv.starts_with("z_re,z_im,psi,max_aniso,aniso_ratio,avg_err,avg_ratio,n_vec,seed\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 50);
    assert!(read(dir.path(), "error_scan.svg").contains(">Psi<"));
}

#[test]
fn schema_violations_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "bad.json", r#"{"schema_version": 1, "grid": {"n_points": 10, "etas": 3}}"#);
    let out = covlaws(dir.path(), &["density", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("grid") && err.contains("etas"), "{err}");

    let cfg = config(dir.path(), "v.json", r#"{"schema_version": 2}"#);
    assert_eq!(covlaws(dir.path(), &["density", "--config", &cfg]).status.code(), Some(1));

    let cfg = config(dir.path(), "none.json", r#"{"schema_version": 1}"#);
    assert_eq!(covlaws(dir.path(), &["edges", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = identity_config(a.path(), "");
    let cb = identity_config(b.path(), "");
    assert!(covlaws(a.path(), &["verify-local-law", "--config", &ca, "--threads", "1"]).status.success());
    assert!(covlaws(b.path(), &["verify-local-law", "--config", &cb, "--threads", "3"]).status.success());
    for f in ["error_scan.csv", "error_scan.svg"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = identity_config(dir.path(), "");
    assert!(covlaws(dir.path(), &["rigidity", "--config", &cfg, "--seed", "11", "--trials", "3"]).status.success());
    let manifest: Value = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["trials"], 3);
    assert_eq!(manifest["model_hash"].as_str().unwrap().len(), 64);
    let first = read(dir.path(), "rigidity.csv");

    let again = tempfile::tempdir().unwrap();
    let cfg = config(again.path(), "replay.json", &manifest["config"].to_string());
    assert!(covlaws(again.path(), &["rigidity", "--config", &cfg]).status.success());
    assert_eq!(read(again.path(), "rigidity.csv"), first);
}

#[test]
fn wigner_edges_of_the_semicircle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "w.json", r#"{"schema_version": 1, "wigner": {"n": 100, "spectrum": [{"value": 0, "weight": 1}]}}"#);
    assert!(covlaws(dir.path(), &["wigner", "edges", "--config", &cfg]).status.success());
    let edges: Value = serde_json::from_str(&read(dir.path(), "edges.json")).unwrap();
    assert!((edges["upper"]["l"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((edges["lower"]["l"].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert!((edges["upper"]["varpi"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn kcoeffs_gaussian_to_rademacher() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "k.json",
        r#"{"schema_version": 1, "kcoeffs": {"law0": {"kind": "gaussian"}, "law1": {"kind": "rademacher"}, "theta": 0.5, "n_max": 4}}"#,
    );
    assert!(covlaws(dir.path(), &["kcoeffs", "--config", &cfg]).status.success());
    let csv = read(dir.path(), "kcoeffs.csv");
    let k4: f64 = csv.lines().nth(4).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // (E r^4 - E g^4) / 4! = (1 - 3) / 24
    assert!((k4 + 1.0 / 12.0).abs() < 1e-12);
}
