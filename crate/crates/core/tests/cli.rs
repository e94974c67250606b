use std::path::Path;
use std::process::{Command, Output};

mod common;
use common::fixture_path;
use jsr_core::cli::CertificateFile;

fn jsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jsr")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn compute_to(dir: &Path, fixture: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let cert = dir.join("cert.json");
    let input = fixture_path(fixture);
    let mut args = vec!["compute", input.to_str().unwrap(), "-o", cert.to_str().unwrap()];
    args.extend_from_slice(extra);
    (jsr(&args), cert)
}

#[test]
fn compute_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (out, cert) = compute_to(dir.path(), "pair.fam", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("Terminated"));
    let fam = fixture_path("pair.fam");
    let v = jsr(&["verify", cert.to_str().unwrap(), "--family", fam.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).trim_end().ends_with("PASS"));
}

#[test]
fn unit_factors_hit_the_iteration_limit() {
    let fam = fixture_path("pair.fam");
    let out = jsr(&["compute", fam.to_str().unwrap(), "--alpha", "1,1", "--kmax", "20"]);
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    assert!(stdout(&out).contains("not certified"));
}

fn tamper(cert: &Path, f: impl FnOnce(&mut CertificateFile)) {
    let mut file = CertificateFile::from_json(&std::fs::read_to_string(cert).unwrap()).unwrap();
    f(&mut file);
    std::fs::write(cert, file.to_json().unwrap()).unwrap();
}

#[test]
fn deleting_a_vertex_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (out, cert) = compute_to(dir.path(), "pair.fam", &[]);
    assert_eq!(out.status.code(), Some(0));
    tamper(&cert, |f| {
        f.certificate.vertices.pop();
    });
    let v = jsr(&["verify", cert.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1), "{}", stdout(&v));
    assert!(stdout(&v).contains("FAIL"));
}

#[test]
fn tampered_jsr_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cert) = compute_to(dir.path(), "pair.fam", &[]);
    tamper(&cert, |f| f.certificate.jsr *= 1.01);
    let v = jsr(&["verify", cert.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1), "{}", stdout(&v));
}

#[test]
fn verify_refuses_a_different_family() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cert) = compute_to(dir.path(), "pair.fam", &[]);
    let other = fixture_path("eight_point.fam");
    let v = jsr(&["verify", cert.to_str().unwrap(), "--family", other.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stderr).contains("hash"));
}

#[test]
fn malformed_input_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.fam");
    std::fs::write(&empty, "").unwrap();
    let out = jsr(&["compute", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let bad = dir.path().join("bad.fam");
    std::fs::write(&bad, "dim = 2\n[matrix A]\n1 0\n0 q\n").unwrap();
    let out = jsr(&["compute", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bounds_bracket_the_pair() {
    let fam = fixture_path("pair.fam");
    let out = jsr(&["bounds", fam.to_str().unwrap(), "--k", "4", "--l", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("<="));
}

#[test]
fn daubechies_table_rows() {
    let out = jsr(&["daubechies", "--table", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3, "{text}");
    assert!(rows[2].starts_with("4\t") && rows[2].contains("1.61792"), "{text}");
}

#[test]
fn butterfly_summary() {
    let out = jsr(&["butterfly"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("rho = 1, alpha = 2"));
}
