use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use schromag::baselines::{
    build_damped, build_gradient_flow, evolution_time, integrate_flow, run_fig1, run_fig2, FlowKind, Fig1Preset,
};
use schromag::blockenc::{
    build_state_prep_pair, dilate, identity_encoding, ket0_bra1, linear_combination, hamiltonian_block_report, product,
    record, tensor, u_c, VerificationRecord,
};
use schromag::complexity::{comparison_csv, method_complexity, DNorm, Method, SystemSummary};
use schromag::mag::{build_transformed, convergence_steps, solve_mag};
use schromag::numkit::io::format_coo;
use schromag::numkit::{direct_solve, norm2, Matrix, Vector};
use schromag::schrodingerize::{
    default_gamma_f, homogenize, pipeline_dense, pipeline_with, split, to_ode, PipelineOptions, PipelineReport,
};
use schromag::{CMatrix, CVector, Complex64, LinearSystem};

use crate::config::{Format, Merged, MethodArg};
use crate::problem::{load, settings, Problem, Settings};
use crate::CliError;

fn num(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn exact(p: &Problem) -> Result<CVector, CliError> {
    let sys = LinearSystem::new(p.a.clone(), p.b.clone()).map_err(num)?;
    direct_solve(&sys).map_err(num)
}

/// Result of one method: the solution, a residual trace `(x, r)` and the
/// pipeline report when the method is `schro`.
struct Solved {
    u: CVector,
    trace_axis: &'static str,
    trace: Vec<(f64, f64)>,
    report: Option<PipelineReport>,
    cost: f64,
}

fn flow_trace(flow: &schromag::baselines::FlowSystem<f64>, t_end: f64, n: usize) -> Result<(CVector, Vec<(f64, f64)>), CliError> {
    let winf = flow.steady_state().map_err(num)?;
    let scale = winf.norm2();
    let traj = integrate_flow(flow, &Vector::zeros(flow.dim()), t_end, 201).map_err(num)?;
    let trace = traj
        .iter()
        .map(|(t, w)| (*t, if scale > 0.0 { (w - &winf).norm2() / scale } else { w.norm2() }))
        .collect();
    let last = &traj.last().expect("two or more samples").1;
    Ok((last.slice(0, n), trace))
}

fn run_method(method: MethodArg, p: &Problem, s: &Settings) -> Result<Solved, CliError> {
    let n = p.b.len();
    let smin_hat = s.params.mu_hat.sqrt();
    match method {
        MethodArg::Mag => {
            let (u, tr) = solve_mag(&p.a, &p.b, s.params, s.delta).map_err(num)?;
            let trace = tr.residuals.iter().enumerate().map(|(k, r)| (k as f64, *r)).collect();
            Ok(Solved { u, trace_axis: "step", trace, report: None, cost: tr.steps as f64 })
        }
        MethodArg::Gradient => {
            let flow = build_gradient_flow(&p.a, &p.b).map_err(num)?;
            let t = evolution_time(FlowKind::Gradient, smin_hat, s.delta);
            let (u, trace) = flow_trace(&flow, t, n)?;
            Ok(Solved { u, trace_axis: "t", trace, report: None, cost: t })
        }
        MethodArg::Damped => {
            let flow = build_damped(&p.a, &p.b, s.gamma).map_err(|e| CliError::Input(e.to_string()))?;
            let t = evolution_time(FlowKind::Damped, smin_hat, s.delta);
            let (u, trace) = flow_trace(&flow, t, n)?;
            Ok(Solved { u, trace_axis: "t", trace, report: None, cost: t })
        }
        MethodArg::Schro => {
            let opts = PipelineOptions { gamma_f: s.gamma_f, ..PipelineOptions::default() };
            let out = pipeline_with(&p.a, &p.b, s.params, s.delta, s.n_p, &opts).map_err(num)?;
            let cost = out.report.n_p as f64;
            Ok(Solved { u: out.u, trace_axis: "t", trace: Vec::new(), report: Some(out.report), cost })
        }
    }
}

fn vector_csv(u: &CVector) -> String {
    let mut s = String::from("index,u_re,u_im\n");
    for (i, z) in u.iter().enumerate() {
        let _ = writeln!(s, "{i},{:e},{:e}", z.re, z.im);
    }
    s
}

fn trace_csv(axis: &str, trace: &[(f64, f64)]) -> String {
    let mut s = format!("{axis},residual\n");
    for (x, r) in trace {
        let _ = writeln!(s, "{x},{r:e}");
    }
    s
}

fn complex_pairs(u: &CVector) -> Vec<(f64, f64)> {
    u.iter().map(|z| (z.re, z.im)).collect()
}

pub fn solve(m: &Merged) -> Result<(), CliError> {
    let p = load(m)?;
    let s = settings(m, &p)?;
    let r = run_method(s.method, &p, &s)?;
    let err = r.u.rel_max_err(&exact(&p)?);
    match m.format {
        Format::Csv => {
            write(&m.out, "solution.csv", &vector_csv(&r.u))?;
            if !r.trace.is_empty() {
                write(&m.out, "trace.csv", &trace_csv(r.trace_axis, &r.trace))?;
            }
        }
        Format::Json => {
            let body = json!({
                "problem": p.name,
                "method": s.method.name(),
                "delta": s.delta,
                "error_vs_direct": err,
                "solution": complex_pairs(&r.u),
                "trace": r.trace,
            });
            write(&m.out, "solution.json", &to_json(&body))?;
        }
    }
    if let Some(rep) = &r.report {
        write(&m.out, "pipeline.json", &to_json(rep))?;
    }
    println!("{} {} n={} error_vs_direct={err:.3e}", p.name, s.method.name(), p.b.len());
    Ok(())
}

fn trajectory_csv(traj: &[(f64, CVector)]) -> String {
    let n = traj.first().map_or(0, |(_, w)| w.len());
    let mut s = String::from("t");
    for j in 0..n {
        let _ = write!(s, ",w{j}_re,w{j}_im");
    }
    s.push('\n');
    for (t, w) in traj {
        let _ = write!(s, "{t}");
        for z in w.iter() {
            let _ = write!(s, ",{:e},{:e}", z.re, z.im);
        }
        s.push('\n');
    }
    s
}

pub fn compare(m: &Merged) -> Result<(), CliError> {
    let p = load(m)?;
    let s = settings(m, &p)?;
    let exact = exact(&p)?;
    let fp = Fig1Preset {
        a: p.a.clone(),
        b: p.b.clone(),
        sigma_min_hat: s.params.mu_hat.sqrt(),
        sigma_max_hat: s.params.l_hat.sqrt(),
        gamma: s.gamma,
        params: s.params,
    };
    let t_end = convergence_steps(s.params.kappa_hat, s.delta) as f64;
    let run = run_fig1(&fp, t_end, 401).map_err(num)?;
    write(&m.out, "mag_trajectory.csv", &trajectory_csv(&run.mag))?;
    write(&m.out, "damped_trajectory.csv", &trajectory_csv(&run.damped))?;
    let mut ratio = String::from("t,mag_ratio,damped_ratio\n");
    for ((t, a), (_, b)) in run.mag_ratio.points.iter().zip(&run.damped_ratio.points) {
        let f = |v: &Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        let _ = writeln!(ratio, "{t},{},{}", f(a), f(b));
    }
    write(&m.out, "ratio.csv", &ratio)?;

    let methods = [MethodArg::Mag, MethodArg::Gradient, MethodArg::Damped, MethodArg::Schro];
    let mut rows = Vec::new();
    for method in methods {
        let r = run_method(method, &p, &s)?;
        rows.push(json!({"method": method.name(), "error_vs_direct": r.u.rel_max_err(&exact), "cost": r.cost}));
    }
    let mut table = String::from("method,error_vs_direct,cost\n");
    for r in &rows {
        let _ = writeln!(table, "{},{:e},{}", r["method"].as_str().unwrap_or(""), r["error_vs_direct"].as_f64().unwrap_or(f64::NAN), r["cost"]);
    }
    match m.format {
        Format::Csv => write(&m.out, "compare.csv", &table)?,
        Format::Json => write(&m.out, "compare.json", &to_json(&rows))?,
    }
    let mag_changes = run.mag_ratio.sign_changes_after(0.05 * t_end);
    println!(
        "{} mag ratio sign changes after transient: {mag_changes}; damped ratio sign changes: {}",
        p.name, run.damped_ratio.sign_changes
    );
    if p.name == "fig2" {
        let n = p.b.len() as f64;
        let deltas: Vec<f64> = [0.5, 1.0, 1.5, 2.0].iter().map(|e| n.powf(-e)).collect();
        let fig2 = run_fig2::<f64>(p.b.len(), &deltas).map_err(num)?;
        let mut csv = String::from("delta,t_mag,t_damped,mag_error,damped_error\n");
        for r in &fig2 {
            let _ = writeln!(csv, "{:e},{},{:e},{:e},{:e}", r.delta, r.t_mag, r.t_damped, r.mag_error, r.damped_error);
        }
        write(&m.out, "fig2.csv", &csv)?;
        if let Some(r) = fig2.iter().find(|r| r.mag_error > r.damped_error) {
            return Err(CliError::Numerical(format!(
                "MAG error {:.3e} exceeds damped {:.3e} at delta {:.3e}",
                r.mag_error, r.damped_error, r.delta
            )));
        }
    }
    if p.name == "fig1" && (mag_changes != 0 || run.damped_ratio.sign_changes < 2) {
        return Err(CliError::Numerical(format!(
            "ratio signature not reproduced: MAG changes {mag_changes}, damped changes {}",
            run.damped_ratio.sign_changes
        )));
    }
    Ok(())
}

pub fn pde(m: &Merged) -> Result<(), CliError> {
    let p = load(m)?;
    let problem = p.pde.clone().ok_or_else(|| CliError::Input(format!("{} is not a PDE preset", p.name)))?;
    let s = settings(m, &p)?;
    let r = run_method(s.method, &p, &s)?;
    let direct = exact(&p)?;
    let sys = LinearSystem::new(p.a.clone(), p.b.clone()).map_err(num)?;
    let oracle = schromag::pde::oracle(&problem, &sys).map_err(num)?;
    let err = r.u.rel_max_err(&direct);
    let oracle_err = oracle.as_ref().map(|o| r.u.rel_max_err(o));
    write(&m.out, "problem.coo", &format_coo(&p.a))?;
    write(&m.out, "problem.json", &to_json(&problem.metadata()))?;
    write(&m.out, "solution.csv", &problem.solution_csv(&r.u))?;
    let report = json!({
        "preset": p.name,
        "method": s.method.name(),
        "delta": s.delta,
        "dim": p.b.len(),
        "kappa_hat": s.params.kappa_hat,
        "error_vs_direct": err,
        "error_vs_oracle": oracle_err,
        "cost": r.cost,
        "pipeline": r.report,
    });
    write(&m.out, "report.json", &to_json(&report))?;
    println!("{} {} dim={} error_vs_direct={err:.3e}", p.name, s.method.name(), p.b.len());
    let tol = s.delta.max(1e-2);
    if !(err <= tol) {
        return Err(CliError::Numerical(format!("error {err:.3e} vs direct solve exceeds tolerance {tol:.1e}")));
    }
    Ok(())
}

pub fn schro(m: &Merged) -> Result<(), CliError> {
    let p = load(m)?;
    let s = settings(m, &p)?;
    let opts = PipelineOptions { gamma_f: s.gamma_f, ..PipelineOptions::default() };
    let out = pipeline_with(&p.a, &p.b, s.params, s.delta, s.n_p, &opts).map_err(num)?;
    write(&m.out, "pipeline.json", &to_json(&out.report))?;
    match m.format {
        Format::Csv => write(&m.out, "solution.csv", &vector_csv(&out.u))?,
        Format::Json => write(&m.out, "solution.json", &to_json(&complex_pairs(&out.u)))?,
    }
    // full warped snapshot only where the dense route is affordable
    if p.b.len() <= 8 {
        let (_, warped, grid) = pipeline_dense(&p.a, &p.b, s.params, s.delta, s.n_p, &opts).map_err(num)?;
        let mut csv = String::from("k,p,component,re,im\n");
        for (k, w) in warped.iter().enumerate() {
            let pk = grid.point(k);
            for (j, z) in w.iter().enumerate() {
                let _ = writeln!(csv, "{k},{pk},{j},{:e},{:e}", z.re, z.im);
            }
        }
        write(&m.out, "snapshot.csv", &csv)?;
    }
    let res = out.report.residual_vs_oracle.unwrap_or(f64::NAN);
    println!("{} schro n_p={} residual_vs_oracle={res:.3e}", p.name, out.report.n_p);
    Ok(())
}

#[derive(Serialize)]
struct BlockencOutput {
    seed: u64,
    records: Vec<VerificationRecord>,
    hamiltonian_blocks: Vec<schromag::blockenc::HamiltonianBlockCheck>,
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> Result<CMatrix, CliError> {
    let a = Matrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let s = norm2(&a).map_err(num)?;
    Ok(a.scale_real(norm / s))
}

pub fn blockenc_verify(m: &Merged) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    let be = |e: schromag::blockenc::BlockError| num(e);
    let mut records = vec![
        record("u_c", &u_c::<f64>(), &ket0_bra1()).map_err(be)?,
        record("identity", &identity_encoding::<f64>(4), &Matrix::identity(4)).map_err(be)?,
    ];
    for k in 0..20 {
        let n = rng.gen_range(1..=8);
        let norm = rng.gen_range(0.1..3.0);
        let a = random_matrix(&mut rng, n, norm)?;
        let alpha = norm2(&a).map_err(num)? * rng.gen_range(1.0..2.0);
        records.push(record(&format!("dilation_{k}"), &dilate(&a, alpha).map_err(be)?, &a).map_err(be)?);
    }
    for k in 0..5 {
        let n = rng.gen_range(1..=4);
        let (a1, a2) = (rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0));
        let r1 = random_matrix(&mut rng, n, 0.9 * a1)?;
        let r2 = random_matrix(&mut rng, n, 0.9 * a2)?;
        let r3 = random_matrix(&mut rng, n, 0.9 * a1)?;
        let e1 = dilate(&r1, a1).map_err(be)?;
        let e2 = dilate(&r2, a2).map_err(be)?;
        let e3 = dilate(&r3, a1).map_err(be)?;
        records.push(record(&format!("product_{k}"), &product(&e1, &e2).map_err(be)?, &(&r1 * &r2)).map_err(be)?);
        records.push(record(&format!("tensor_{k}"), &tensor(&e1, &e2), &schromag::numkit::kron(&r1, &r2)).map_err(be)?);
        let y = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let pair = build_state_prep_pair(&y).map_err(be)?;
        let sum = linear_combination(&[&e1, &e3], &pair).map_err(be)?;
        let reference = &r1.scale_real(y[0]) + &r3.scale_real(y[1]);
        records.push(record(&format!("sum_{k}"), &sum, &reference).map_err(be)?);
    }
    let p = match (&m.preset, &m.matrix) {
        (None, None) => load(&Merged { preset: Some("fig1".into()), ..Merged::default() })?,
        _ => load(m)?,
    };
    let s = settings(m, &p)?;
    let sys = build_transformed(&p.a, &p.b, s.params).map_err(num)?;
    let (g, f) = to_ode(&sys);
    let gf = s.gamma_f.unwrap_or_else(|| default_gamma_f(&s.params));
    let hs = homogenize(&g, &f, &Vector::zeros(g.rows()), gf).map_err(num)?;
    let hamiltonian_blocks = hamiltonian_block_report(&sys, &split(&hs), gf).map_err(be)?;
    let failed: Vec<String> = records.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    let failed_msg = failed.join(", ");
    let out = BlockencOutput { seed: m.seed, records, hamiltonian_blocks };
    write(&m.out, "blockenc.json", &to_json(&out))?;
    println!("{} encodings verified, {} failed", out.records.len(), failed.len());
    if !failed.is_empty() {
        return Err(CliError::Numerical(format!("verification failed: {failed_msg}")));
    }
    Ok(())
}

pub fn complexity(m: &Merged, linear_np: bool) -> Result<(), CliError> {
    let p = load(m)?;
    let s = settings(m, &p)?;
    let summary = SystemSummary::from_matrix(&p.a, s.params.kappa_hat, s.delta, s.n_p).map_err(num)?;
    let d = if linear_np { DNorm::LinearNp } else { DNorm::LogNp };
    let reports = Method::ALL
        .iter()
        .map(|&k| method_complexity(k, &summary, d))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let csv = comparison_csv(&reports);
    match m.format {
        Format::Csv => write(&m.out, "complexity.csv", &csv)?,
        Format::Json => write(&m.out, "complexity.json", &to_json(&json!({"summary": summary, "reports": reports})))?,
    }
    print!("{csv}");
    Ok(())
}
