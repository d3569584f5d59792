//! End-to-end runs of the `sympf` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sympf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympf")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn skewpoly_reports_norms_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = sympf(dir.path(), &["skewpoly", "--family", "gse", "--n", "1", "--count", "4", "--verify", "--out", "b.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("b.json"));
    assert!((v["norms"][0][0].as_f64().unwrap() - 2.170803).abs() < 1e-6);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["config"]["N"], 1);
}

#[test]
fn chiral_hermitean_basis_has_expected_first_odd_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let o = sympf(dir.path(), &["skewpoly", "--family", "chgse", "--mu", "0", "--count", "2"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let q1: Vec<f64> = v["polys"][1].as_array().unwrap().iter().map(|c| c[0].as_f64().unwrap()).collect();
    assert_eq!(q1, vec![-1.0, 1.0]);
}

#[test]
fn invalid_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["correlator", "--tau", "1.5", "--points", "0.1+0.1i"],
        &["charpoly", "--n", "2", "--masses", "0.3,0.3"],
        &["correlator", "--family", "chgse", "--mu", "1.5", "--points", "0.1+0.1i"],
        &["correlator", "--points", "0.1+0.1j"],
        &["skewpoly", "--family", "goe"],
    ];
    for args in cases {
        let o = sympf(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn perturbation_resolves_coincident_masses() {
    let dir = tempfile::tempdir().unwrap();
    let o = sympf(dir.path(), &["charpoly", "--n", "2", "--masses", "0.3,0.3", "--perturb-masses", "1e-4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["value"][0].as_f64().unwrap().is_finite());
}

#[test]
fn projected_density_of_one_pair_is_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let o = sympf(dir.path(), &["correlator", "--n", "1", "--projected", "--grid", "-3:3:13", "--out", "d.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for r in rows(&std::fs::read_to_string(dir.path().join("d.csv")).unwrap()) {
        let expected = (-r[0] * r[0] / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((r[1] - expected).abs() < 1e-12, "{r:?}");
    }
    let side = json(&dir.path().join("d.json"));
    assert!(side["normalization"]["relative_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn grid_output_is_independent_of_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["correlator", "--n", "2", "--grid", "-2:2:9,0.1:2:5", "--masses", "0.3+0.1i", "--out", "g.csv"];
    let mut one = vec!["--threads", "1"];
    one.extend(args);
    let mut four = vec!["--threads", "4"];
    four.extend(args);
    assert_eq!(code(&sympf(a.path(), &one)), 0);
    assert_eq!(code(&sympf(b.path(), &four)), 0);
    for f in ["g.csv", "g.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let side = json(&a.path().join("g.json"));
    assert!(side["normalization"]["relative_error"].as_f64().unwrap() < 1e-8);
    assert_eq!(side["diagnostics"]["r_index"], 2);
    assert_eq!(side["diagnostics"]["parity"], "odd");
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"N": 2, "tau": 0.3}"#).unwrap();
    let o = sympf(dir.path(), &["--config", "c.json", "skewpoly", "--n", "1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["N"], 2);
    assert_eq!(v["config"]["tau"], 0.3);
}

#[test]
fn two_point_correlator_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let o = sympf(
        dir.path(),
        &["correlator", "--n", "2", "--k", "2", "--points", "0.1+0.2i,0.5+0.3i;0.5+0.3i,0.1+0.2i"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(r.len(), 2);
    assert!((r[0][4] - r[1][4]).abs() <= 1e-10 * r[0][4].abs());
}

#[test]
fn sampler_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--n", "2", "--steps", "2000", "--burn-in", "200", "--seed", "9"];
    let a = sympf(dir.path(), &args);
    let b = sympf(dir.path(), &args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(rows(&String::from_utf8(a.stdout).unwrap()).len(), 200);
}

#[test]
fn sweep_approaches_the_hermitean_limit() {
    let dir = tempfile::tempdir().unwrap();
    let o = sympf(dir.path(), &["sweep", "--family", "gse", "--n", "2", "--observable", "norms"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["monotone"], true);
}

#[test]
fn identities_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sympf(dir.path(), &["verify", "identities", "--out", "r.json"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().trim_end().ends_with("PASS"));
    assert_eq!(json(&dir.path().join("r.json"))["passed"], true);
}
