use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wgcloak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgcloak")).args(args).output().unwrap()
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.ini");
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BARE: &str = "[solver]\nh = 0.05\nx_t = 2.5\n";

#[test]
fn solve_bare_strip_writes_transparent_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), BARE);
    let out = dir.path().join("out");
    let o = wgcloak(&["solve", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("smatrix.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("omega,re_r_plus"));
    let v: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(v[1].hypot(v[2]) < 1e-6);
    assert!((v[5] - 1.0).hypot(v[6]) < 1e-4);
}

#[test]
fn outputs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{BARE}[obstacle]\nvertices = -0.3 0.2  0.2 0.7  0.3 0.2\n[output]\nfield_nx = 40\nfield_ny = 8\n"));
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = wgcloak(&["solve", "--config", s(&cfg), "--out", s(&out), "--dump-field", "--heatmap"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["smatrix.csv", "field_w_plus.csv", "field_w_minus.csv", "field_w_plus.pgm"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(std::fs::read(a.join("field_w_minus.pgm")).unwrap().starts_with(b"P5\n40 8\n255\n"));
}

#[test]
fn config_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[solver]\nh = 0.05\nomega = 4\n");
    let o = wgcloak(&["solve", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.ini:3:") && err.contains("omega"), "{err}");
    let o = wgcloak(&["sweep", "--config", s(&config(dir.path(), BARE)), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(wgcloak(&["solve", "--bogus"]).status.code(), Some(2));
}

#[test]
fn mesh_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[solver]\nh = 0.2\n");
    assert_eq!(wgcloak(&["solve", "--config", s(&cfg), "--out", s(dir.path())]).status.code(), Some(3));
}

#[test]
fn design_failures_exit_4() {
    // Nothing reflects in the bare strip, so there is nothing to cancel.
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[solver]\nh = 0.1\n[design]\np = -3\n");
    let o = wgcloak(&["design", "--config", s(&cfg), "--out", s(dir.path()), "--objective", "zero_reflection", "--eps", "0.3"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let o = wgcloak(&["design", "--config", s(&cfg), "--out", s(dir.path()), "--objective", "cloak", "--resonators", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_trace_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{BARE}[resonator]\np = 0\neps = 0.3\nlength = 0.6\n[sweep]\nfrom = 0.3\nto = 0.9\nsteps = 6\n"));
    let out = dir.path().join("out");
    let o = wgcloak(&["sweep", "--config", s(&cfg), "--out", s(&out), "--jobs", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("length,"));
    assert!(std::fs::read_to_string(out.join("sweep_summary.txt")).unwrap().contains("R: center"));
}

#[test]
fn validate_prints_error_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{BARE}[validate]\neta_min = -1\neta_max = 1\neta_points = 3\n"));
    let consts = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../results/constants.txt");
    let out = dir.path().join("out");
    let o = wgcloak(&["validate-asymptotics", "--config", s(&cfg), "--out", s(&out), "--eps", "0.3", "--constants", s(&consts)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("validation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
