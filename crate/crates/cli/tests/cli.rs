use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cgl-lab"));
    c.env_remove("CGL_LAB_THREADS");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(format!("{name}.toml"))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_exit_codes_follow_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["run"]).arg(fixture("zero_stability")).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Confirmed"));
    assert_eq!(json(&dir.path().join("summary.json"))["result"]["verdict"], "confirmed");

    let o = bin().args(["run"]).arg(fixture("smooth")).arg("--out").arg(dir.path().join("s")).output().unwrap();
    assert_eq!(code(&o), 3);

    // Batch: one subdirectory per file, worst verdict wins.
    let batch = dir.path().join("batch");
    let o = bin()
        .env("CGL_LAB_THREADS", "2")
        .args(["run"])
        .arg(fixture("zero_stability"))
        .arg(fixture("smooth"))
        .arg("--out")
        .arg(&batch)
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(batch.join("zero_stability/monitors.csv").exists());
    assert!(batch.join("smooth/monitors.csv").exists());
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "kind = \"zero_stability\"\nseed = \"x\"\n").unwrap();
    let o = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));

    assert_eq!(code(&bin().arg("frobnicate").output().unwrap()), 1);
    assert_eq!(code(&bin().args(["boundstate", "--theta"]).output().unwrap()), 1);
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);

    let o = bin().env("CGL_LAB_THREADS", "many").arg("run").arg(fixture("smooth")).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("CGL_LAB_THREADS"));
}

fn read_profile(dir: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(dir.join("profile.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn boundstate_accepts_both_spellings() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p) = (dir.path().join("trig"), dir.path().join("phys"));
    let gamma = 3f64.atan();
    let o = bin()
        .args(["boundstate", "--theta", "0", "--k", "0", "--sigma", "2", "--length", "80", "--nx", "1024", "--out"])
        .arg(&t)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&t.join("summary.json"));
    assert!((s["d"].as_f64().unwrap() - 1.0).abs() < 1e-14);
    assert!((s["gamma"].as_f64().unwrap() - gamma).abs() < 1e-14);
    assert!((s["epsilon"].as_f64().unwrap() - 0.5).abs() < 1e-14);
    assert!(s["residual"].as_f64().unwrap() < 1e-8);
    assert!(t.join("profile.svg").exists());

    // -(b + i beta) = e^{i gamma} with a = 1, alpha = 0: the same equation.
    let (b, beta) = (-gamma.cos(), -gamma.sin());
    let o = bin()
        .args(["boundstate", "--a", "1", "--alpha", "0", "--sigma", "2", "--length", "80", "--nx", "1024", "--no-svg"])
        .args(["--b", &b.to_string(), "--beta", &beta.to_string(), "--out"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!p.join("profile.svg").exists());
    let (rt, rp) = (read_profile(&t), read_profile(&p));
    assert_eq!(rt.len(), 1024);
    for (x, y) in rt.iter().zip(&rp) {
        for (u, v) in x.iter().zip(y) {
            assert!((u - v).abs() < 1e-12 * (1.0 + u.abs()), "{u} vs {v}");
        }
    }

    // A nonlinear phase the construction cannot accommodate.
    let o = bin().args(["boundstate", "--theta", "0", "--gamma", "0.5", "--sigma", "2", "--length", "80"]).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("gamma"));
    // Mixed spellings.
    let o = bin().args(["boundstate", "--theta", "0", "--a", "1", "--sigma", "2"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn spectrum_reports_the_symmetry_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["spectrum", "--theta", "0.5", "--k", "-1", "--sigma", "1", "--nx", "256", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("report.json"));
    assert!(r["kernel_dim"].as_u64().unwrap() >= 2, "{r}");
    assert_eq!(r["bound_state"]["sigma"], 1.0);
    assert!(r.get("eigenvalues").is_none());
    let eig = fs::read_to_string(dir.path().join("eigenvalues.csv")).unwrap();
    assert_eq!(eig.lines().next().unwrap(), "re,im");
    assert_eq!(eig.lines().count(), 1 + 512);
    assert!(dir.path().join("spectrum.svg").exists());
}

#[test]
fn continuation_writes_the_branch() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["continuation", "--theta", "0.3", "--gamma", "0.2", "--sigma", "2", "--mu-max", "0.1", "--steps", "10"])
        .args(["--k-target", "0.9", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("branch.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "mu,omega,k,residual,v_norm,physical_residual");
    assert_eq!(csv.lines().count(), 1 + 11);
    let s = json(&dir.path().join("summary.json"));
    assert!(s["max_residual"].as_f64().unwrap() < 1e-10);
    assert!(s["derivative_check"]["dk_err"].as_f64().unwrap() < 1e-2);
    assert!(s["mu_of_k"].is_number() || s["mu_of_k"].is_string());

    // Non-Dirichlet grids are refused.
    let o = bin()
        .args(["continuation", "--theta", "0.3", "--gamma", "0.2", "--sigma", "2", "--grid", "periodic", "--nx", "64"])
        .arg("--out")
        .arg(dir.path().join("p"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn evolve_records_monitors_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["evolve", "--a", "1", "--b", "1", "--k", "-0.5", "--sigma", "2"])
        .args(["--dt", "1e-3", "--t-final", "0.1", "--monitor-stride", "10", "--snapshot-stride", "50"])
        .args(["--monitors", "L2,H1,V", "--initial", "eigenmode:1,0.5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("monitors.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,L2,H1,V");
    assert_eq!(csv.lines().count(), 1 + 11);
    let index = fs::read_to_string(dir.path().join("snapshots/index.csv")).unwrap();
    assert_eq!(index.lines().count(), 1 + 3);
    assert!(dir.path().join("snapshots/u_00002.csv").exists());
    assert_eq!(json(&dir.path().join("summary.json"))["outcome"]["status"], "completed");
}

#[test]
fn evolve_bound_state_in_rotating_frame() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["evolve", "--theta", "0.3", "--k", "0", "--sigma", "2", "--nx", "1024", "--frame", "rotating"])
        .args(["--dt", "1e-3", "--t-final", "0.2", "--monitor-stride", "200", "--initial", "boundstate", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("monitors.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    let (first, last) = (&rows[0], rows.last().unwrap());
    assert!((last[2] / first[2] - 1.0).abs() < 1e-6, "{first:?} {last:?}");

    let o = bin()
        .args(["evolve", "--theta", "0.3", "--sigma", "2", "--dt", "1e-3", "--t-final", "0.1", "--initial", "sine:1"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}
