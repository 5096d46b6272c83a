use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schromag"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pde_helmholtz_meets_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["pde", "--preset", "fig3a", "--method", "mag", "--delta", "1e-4"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("report.json"));
    assert!(r["error_vs_oracle"].as_f64().unwrap() < 1e-4);
    assert!(r["error_vs_direct"].as_f64().unwrap() < 1e-4);
    for f in ["problem.coo", "problem.json", "solution.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn compare_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["compare", "--preset", "fig1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["mag_trajectory.csv", "damped_trajectory.csv", "ratio.csv"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.lines().count() > 100, "{f}");
    }
}

#[test]
fn schro_solve_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("A.coo");
    let b = dir.path().join("b.vec");
    std::fs::write(&a, "2 2 3\n0 0 2 0\n0 1 0.5 0\n1 1 1 0\n").unwrap();
    std::fs::write(&b, "1 0\n-1 0\n").unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["solve", "--matrix", a.to_str().unwrap(), "--rhs", b.to_str().unwrap(), "--method", "schro", "--np", "128"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = json(&out.join("pipeline.json"));
    assert!(p["residual_vs_oracle"].as_f64().unwrap() < 1e-2);
    let sol = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    let u0: f64 = sol.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((u0 - 0.75).abs() < 1e-2);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--preset", "nope"],
        vec!["solve"],
        vec!["solve", "--preset", "fig1", "--delta", "2"],
        vec!["solve", "--preset", "fig1", "--np", "100"],
    ] {
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let args = ["blockenc-verify", "--seed", "5"];
    assert!(run(&args, d1.path()).status.success());
    assert!(run(&args, d2.path()).status.success());
    let f = "blockenc.json";
    assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap());
    let args = ["solve", "--preset", "fig3a", "--method", "schro"];
    assert!(run(&args, d1.path()).status.success());
    assert!(run(&args, d2.path()).status.success());
    for f in ["solution.csv", "pipeline.json"] {
        assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn blockenc_records_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["blockenc-verify", "--seed", "1"], dir.path()).status.success());
    let v = json(&dir.path().join("blockenc.json"));
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 37);
    assert!(recs.iter().all(|r| r["pass"] == true));
    assert!(!v["hamiltonian_blocks"].as_array().unwrap().is_empty());
}

#[test]
fn complexity_orders_methods() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["complexity", "--preset", "fig3a", "--format", "json"], dir.path());
    assert!(o.status.success());
    let v = json(&dir.path().join("complexity.json"));
    let q = |name: &str| {
        v["reports"].as_array().unwrap().iter().find(|r| r["method"] == name).unwrap()["queries"].as_f64().unwrap()
    };
    assert!(q("mag") < q("gradient"));
    let o = run(&["complexity", "--preset", "fig3a"], dir.path());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("method,kappa_like,chi,queries,gates,repetitions"));
    assert!(dir.path().join("complexity.csv").exists());
}
