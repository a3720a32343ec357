use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rittlab::gallery::{foguel_operator, ConditionalBasis};
use rittlab::lpcore::matrix_to_json_string;
use rittlab::ritt::{analyze, RittConfig};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn rittlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rittlab"))
        .env_remove("RITTLAB_SEED")
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_zero_and_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rittlab(&["analyze", path(&fixture("zero3.json")), "--p", "4", "--nmax", "16"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(tmp.path(), "analyze.json")["m_power"], 1.0);
    let o = rittlab(&["analyze", path(&fixture("identity3.json")), "--nmax", "16"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(tmp.path(), "analyze.json")["m_diff"], 0.0);
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout, json(tmp.path(), "analyze.json"));
}

#[test]
fn analyze_matches_library_call() {
    let tmp = tempfile::tempdir().unwrap();
    let config = RittConfig { n_max: 16, ..RittConfig::default() };
    let f = foguel_operator(&ConditionalBasis::default().matrix(6), 3.0, &config, 11).unwrap();
    let file = tmp.path().join("foguel.json");
    std::fs::write(&file, matrix_to_json_string(f.operator.matrix()).unwrap()).unwrap();
    let o = rittlab(&["analyze", path(&file), "--p", "3", "--nmax", "16", "--seed", "11"], tmp.path());
    assert!(o.status.code() == Some(0) || o.status.code() == Some(3));
    let lib = analyze(&f.operator, &config, 11).unwrap();
    let mut expected = serde_json::to_string_pretty(&lib).unwrap();
    expected.push('\n');
    assert_eq!(std::fs::read_to_string(tmp.path().join("analyze.json")).unwrap(), expected);
}

#[test]
fn seed_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let m = fixture("diag16.json");
    let args = ["squarefn", path(&m), "--p", "4", "--random", "5"];
    Command::new(env!("CARGO_BIN_EXE_rittlab"))
        .env("RITTLAB_SEED", "9")
        .args(args)
        .arg("--out")
        .arg(&a)
        .output()
        .unwrap();
    rittlab(&[&args[..], &["--seed", "9"]].concat(), &b);
    assert_eq!(std::fs::read(a.join("squarefn.csv")).unwrap(), std::fs::read(b.join("squarefn.csv")).unwrap());
}

#[test]
fn squarefn_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rittlab(
        &["squarefn", path(&fixture("diag16.json")), "--p", "4", "--alpha", "0.5", "--beta", "0.5", "--random", "20"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let s = json(tmp.path(), "squarefn.json");
    assert_eq!(s["c_min"], 1.0);
    assert_eq!(s["c_max"], 1.0);
    let o = rittlab(&["squarefn", path(&fixture("identity3.json")), "--random", "4"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let s = json(tmp.path(), "squarefn.json");
    assert_eq!(s["rows"], 0);
    assert_eq!(s["excluded"].as_array().unwrap().len(), 4);
    assert!(s["spread"].is_null());
    let x = tmp.path().join("x.json");
    std::fs::write(&x, "[[1, 0], [0, 1], [0.5, 0.5]]").unwrap();
    let o = rittlab(
        &["squarefn", path(&fixture("zero3.json")), "--x", path(&x), "--alpha", "1", "--beta", "1"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(tmp.path(), "squarefn.json")["c_min"], 1.0);
}

#[test]
fn dilate_examples() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["zero3.json", "identity3.json"] {
        let o = rittlab(&["dilate", path(&fixture(name)), "--p", "4", "--K", "8", "--M", "3"], tmp.path());
        assert_eq!(o.status.code(), Some(0));
        let d = json(tmp.path(), "dilation.json");
        assert_eq!(d["verified"], true);
        assert!(d["max_residual"].as_f64().unwrap() < 1e-12);
    }
    let o = rittlab(&["dilate", path(&fixture("diag_05_09.json")), "--p", "4"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(json(tmp.path(), "dilation.json")["max_residual"].as_f64().unwrap() <= 1e-6);
    let csv = std::fs::read_to_string(tmp.path().join("residuals.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    let o = rittlab(&["dilate", path(&fixture("diag_05_09.json")), "--p", "4", "--K", "8", "--M", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(tmp.path(), "dilation.json")["verified"], false);
}

#[test]
fn gallery_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rittlab(&["gallery", "car", "--m", "3"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(tmp.path(), "car.json")["w"]["pairing"], 12);
    let o = rittlab(&["gallery", "itheta", "--theta", &std::f64::consts::FRAC_PI_2.to_string()], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let i = json(tmp.path(), "itheta.json")[0]["i_quadrature"].as_f64().unwrap();
    assert!((i - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    let o = rittlab(&["gallery", "foguel", "--n", "16", "--nmax", "32", "--fejer", "3", "--N", "32"], tmp.path());
    assert!(o.status.code() == Some(0) || o.status.code() == Some(3));
    let f = json(tmp.path(), "foguel.json");
    assert_eq!(f["foguel"]["ritt"]["dim"], 16);
    assert_eq!(f["polybound"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(f["polybound"]["indicator_only"], true);
}

#[test]
fn input_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(rittlab(&["analyze", "/nonexistent/m.json"], tmp.path()).status.code(), Some(2));
    assert_eq!(rittlab(&["dilate", path(&fixture("zero3.json")), "--p", "0.5"], tmp.path()).status.code(), Some(2));
    assert_eq!(rittlab(&["--tol.unknown", "1", "gallery", "itheta"], tmp.path()).status.code(), Some(2));
    assert_eq!(rittlab(&["--nmax", "0", "gallery", "itheta"], tmp.path()).status.code(), Some(2));
}
