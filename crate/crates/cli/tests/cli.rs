use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blochsep::bipartite::compose_state;
use blochsep::states::{self, Sign, WernerParams};
use blochsep::BipartiteDecomposed;
use blochsep_cli::formats::{parse_decomposition, StateFile};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_blochsep"));
    c.env_remove("SEP_HORN_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_state(dir: &Path, name: &str, d: &BipartiteDecomposed) -> PathBuf {
    let (n, m) = d.dims();
    let path = dir.join(name);
    std::fs::write(&path, StateFile::from_matrix(compose_state(d).matrix(), n, m).to_json()).unwrap();
    path
}

#[test]
fn bell_is_entangled_with_kyfan_margin_two() {
    let path = data("bell.state");
    let out = run(&["analyze", "--report", "structured", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(report["status"], "entangled");
    assert_eq!(report["schema"], "blochsep-report");
    let kf = report["criteria"].as_array().unwrap().iter().find(|c| c["name"] == "kyfan-necessary").unwrap();
    assert_eq!(kf["outcome"], "violated");
    assert!((kf["margin"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn bell_text_report_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.state");
    std::fs::copy(data("bell.state"), &path).unwrap();
    let out = bin().current_dir(dir.path()).args(["analyze", "bell.state"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let golden = std::fs::read_to_string(data("bell.golden")).unwrap();
    assert_eq!(stdout(&out), golden);
}

#[test]
fn separable_werner_writes_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_state(dir.path(), "werner_2_phi1.state", &states::werner(&WernerParams { n: 2, phi: 1.0 }).unwrap());
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = std::fs::read_to_string(path.with_extension("decomp")).unwrap();
    let dec = parse_decomposition(&text).unwrap();
    assert_eq!(dec.dims(), (2, 2));
    assert!(!dec.is_empty());
}

#[test]
fn malformed_input_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.state");
    std::fs::write(&bad, "{\"format\": \"blochsep-state\"").unwrap();
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(64));
    let missing = dir.path().join("missing.state");
    assert_eq!(run(&["analyze", missing.to_str().unwrap()]).status.code(), Some(64));
    // Hermitian with trace one but a negative eigenvalue
    let mut f = StateFile::from_matrix(compose_state(&states::bell()).matrix(), 2, 2);
    f.entries[0] = [1.5, 0.0];
    f.entries[15] = [-0.5, 0.0];
    let neg = dir.path().join("neg.state");
    std::fs::write(&neg, f.to_json()).unwrap();
    assert_eq!(run(&["analyze", neg.to_str().unwrap()]).status.code(), Some(64));
    assert_eq!(run(&["analyze"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn batch_exit_code_is_the_maximum() {
    let dir = tempfile::tempdir().unwrap();
    let sep = write_state(dir.path(), "sep.state", &states::werner(&WernerParams { n: 2, phi: 1.0 }).unwrap());
    let bell = data("bell.state");
    let out = run(&["analyze", "--jobs", "2", "--report", "structured", sep.to_str().unwrap(), bell.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["status"], "separable");
    assert_eq!(lines[1]["status"], "entangled");
}

#[test]
fn tolerance_environment_variable() {
    let path = data("bell.state");
    let out = bin().env("SEP_HORN_TOL", "1e-6").args(["analyze", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().env("SEP_HORN_TOL", "not-a-number").args(["analyze", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(64));
    // an explicit flag wins over the environment
    let out = bin()
        .env("SEP_HORN_TOL", "not-a-number")
        .args(["analyze", "--tol", "1e-9", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn horn_triples_listing() {
    let out = run(&["horn-triples", "2", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 3);
    let out = run(&["horn-triples", "3", "1"]);
    assert_eq!(stdout(&out).lines().count(), 6);
    assert!(stdout(&out).lines().any(|l| l == "1 I:{2} J:{2} K:{3}"));
    assert_eq!(run(&["horn-triples", "17", "1"]).status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.txt");
    assert_eq!(run(&["horn-triples", "4", "2", "--out", file.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(file).unwrap().lines().count(), 21);
}

#[test]
fn werner_command() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("w3.state");
    let out = run(&["werner", "3", "1", "--decompose", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dec = parse_decomposition(&std::fs::read_to_string(out_path.with_extension("decomp")).unwrap()).unwrap();
    assert_eq!(dec.len(), 9);
    let state = StateFile::parse(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(state.dims, [3, 3]);

    assert_eq!(run(&["werner", "3", "-0.1"]).status.code(), Some(1));
    assert_eq!(run(&["werner", "2", "0.5"]).status.code(), Some(0));
    assert_eq!(run(&["werner", "2", "1.5"]).status.code(), Some(64));
}

#[test]
fn normal_form_command() {
    let dir = tempfile::tempdir().unwrap();
    let pz = write_state(dir.path(), "pz.state", &states::p_zero(0.5, Sign::Plus).unwrap());
    let out = run(&["normal-form", pz.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("not converged"), "{text}");
    let psi_plus = text.lines().find(|l| l.contains("fidelity to psi+")).unwrap();
    let f: f64 = psi_plus.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(f > 0.99);

    let w = write_state(dir.path(), "w.state", &states::werner(&WernerParams { n: 2, phi: 0.4 }).unwrap());
    let text = stdout(&run(&["normal-form", w.to_str().unwrap()]));
    assert!(text.contains("converged after 0 iterations"), "{text}");

    let r = write_state(dir.path(), "r.state", &states::random_bipartite(2, 3, 11));
    let filtered = dir.path().join("r_nf.state");
    let text = stdout(&run(&["normal-form", r.to_str().unwrap(), "--out", filtered.to_str().unwrap()]));
    assert!(text.contains(": converged after"), "{text}");
    let f = StateFile::parse(&std::fs::read_to_string(filtered).unwrap()).unwrap();
    let (rho, n, m) = f.density().unwrap();
    let d = blochsep::decompose_state(&rho, n, m).unwrap();
    assert!(d.marginal_norm() < 1e-9);
}
