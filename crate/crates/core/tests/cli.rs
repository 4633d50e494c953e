//! End-to-end runs of the `canonform` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use canonform::io::serialize_matrix;
use canonform::linalg::inverse;
use canonform::numerics::{c, ComplexMatrix};
use canonform::oracles::{random_diag_pair, random_nonderogatory, random_partition, random_similarity, random_unitary};
use tempfile::TempDir;

fn canonform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canonform"))
        .args(args)
        .env_remove("CANONFORM_TOL")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, m: &ComplexMatrix) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serialize_matrix(m)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sample() -> ComplexMatrix {
    random_nonderogatory(&random_partition(5, 11), 0.8, 11)
}

#[test]
fn canon_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", &sample());
    let first = canonform(&["canon", s(&m)]);
    let second = canonform(&["canon", s(&m)]);
    assert_eq!(first.status.code(), Some(0));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn canon_result_passes_check() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", &sample());
    let out = dir.path().join("result.json");
    assert_eq!(canonform(&["canon", s(&m), "-o", s(&out)]).status.code(), Some(0));
    let check = canonform(&["check", s(&out)]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
    let report: serde_json::Value = serde_json::from_slice(&check.stdout).unwrap();
    assert_eq!(report["canonical"], true);
}

#[test]
fn canon_pair_result_passes_check() {
    let dir = TempDir::new().unwrap();
    let (d, b) = random_diag_pair(4, 0.6, 12);
    let sim = random_similarity(4, 1e2, 12);
    let si = inverse(&sim).unwrap();
    let m = write(&dir, "m.json", &(&(&si * &d) * &sim));
    let n = write(&dir, "n.json", &(&(&si * &b) * &sim));
    let out = dir.path().join("pair.json");
    assert_eq!(canonform(&["canon-pair", s(&m), s(&n), "-o", s(&out)]).status.code(), Some(0));
    assert_eq!(canonform(&["check", s(&out)]).status.code(), Some(0));
}

#[test]
fn tampered_result_fails_check() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", &sample());
    let out = dir.path().join("result.json");
    assert_eq!(canonform(&["canon", s(&m), "-o", s(&out)]).status.code(), Some(0));
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // The first reduced position holds a positive real; flip its sign.
    let pos = doc["reduced_positions"][0].clone();
    let (r, col) = (pos[0].as_u64().unwrap() as usize - 1, pos[1].as_u64().unwrap() as usize - 1);
    let entry = &mut doc["matrices"]["m_can"]["entries"][r][col][0];
    *entry = serde_json::json!(-entry.as_f64().unwrap());
    std::fs::write(&out, serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(canonform(&["check", s(&out)]).status.code(), Some(1));
}

#[test]
fn similar_exit_codes() {
    let dir = TempDir::new().unwrap();
    let a = sample();
    let u = random_unitary(a.rows(), 13);
    let b = &(&u.adjoint() * &a) * &u;
    let mut other = a.clone();
    other[(0, a.cols() - 1)] += c(0.5, 0.0);
    let (pa, pb, po) = (write(&dir, "a.json", &a), write(&dir, "b.json", &b), write(&dir, "o.json", &other));
    assert_eq!(canonform(&["similar", s(&pa), s(&pb)]).status.code(), Some(0));
    assert_eq!(canonform(&["-q", "similar", s(&pa), s(&po)]).status.code(), Some(1));
}

#[test]
fn similar_pair_exit_codes() {
    let dir = TempDir::new().unwrap();
    let (m, n) = random_diag_pair(4, 0.7, 14);
    let sim = random_similarity(4, 1e2, 14);
    let si = inverse(&sim).unwrap();
    let (m2, n2) = (&(&si * &m) * &sim, &(&si * &n) * &sim);
    let mut n3 = n.clone();
    n3[(1, 1)] += c(1.0, 0.0);
    let p = [
        write(&dir, "m.json", &m),
        write(&dir, "n.json", &n),
        write(&dir, "m2.json", &m2),
        write(&dir, "n2.json", &n2),
        write(&dir, "n3.json", &n3),
    ];
    let same = canonform(&["similar-pair", s(&p[0]), s(&p[1]), s(&p[2]), s(&p[3])]);
    assert_eq!(same.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(report["similar"], true);
    let differ = canonform(&["similar-pair", s(&p[0]), s(&p[1]), s(&p[0]), s(&p[4])]);
    assert_eq!(differ.status.code(), Some(1));
}

#[test]
fn seeded_self_check_passes_on_good_input() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", &sample());
    assert_eq!(canonform(&["--seed", "5", "canon", s(&m)]).status.code(), Some(0));
}

#[test]
fn decompose_emits_summands() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", &sample());
    let out = canonform(&["decompose", s(&m)]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!doc["summands"].as_array().unwrap().is_empty());
}

#[test]
fn tolerance_environment_is_validated() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", &sample());
    let out = Command::new(env!("CARGO_BIN_EXE_canonform"))
        .args(["canon", s(&m)])
        .env("CANONFORM_TOL", "tol_zero=oops")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
