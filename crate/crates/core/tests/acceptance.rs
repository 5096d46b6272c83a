//! Acceptance gate: one PASS/FAIL line per criterion with its runtime.
//! Exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use schromag::baselines::{build_gradient_flow, fig1_preset, run_fig1, run_fig2};
use schromag::blockenc::{
    build_state_prep_pair, dilate, ket0_bra1, linear_combination, measure_eps, product, tensor, u_c, verify,
    BlockEncoding,
};
use schromag::complexity::{eta0, method_complexity, queries, repetitions, DNorm, Method, SystemSummary};
use schromag::mag::{build_transformed, convergence_steps, derive_params, mag_iterate_lean, solve_mag, steady_state};
use schromag::numkit::{direct_solve, eigvals, kron, norm2, Matrix, Vector};
use schromag::pde::{preset, PRESET_NAMES};
use schromag::schrodingerize::{
    build_grid, evolve, homogenize, pipeline_with, recover_single_point, split, warp_initial, PipelineOptions,
};
use schromag::{CMatrix, CVector};

type Outcome = Result<String, String>;

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// 50 random systems with spectra strictly inside slack bounds.
fn random_suite() -> Vec<(CMatrix, CVector, schromag::MagParams)> {
    let mut rng = common::rng(1);
    (0..50)
        .map(|_| {
            let n = rng.gen_range(2..=32);
            let smin = rng.gen_range(0.05..0.5);
            let smax = rng.gen_range(1.0..5.0);
            let (a, _) = common::matrix_with_sigma(&mut rng, n, smin, smax);
            let b = common::random_vector(&mut rng, n);
            let params = derive_params(smax * smax * 1.1, smin * smin * 0.9).unwrap();
            (a, b, params)
        })
        .collect()
}

fn c1_spectral_radius() -> Outcome {
    let mut worst = 0.0f64;
    for (a, b, p) in random_suite() {
        let sys = build_transformed(&a, &b, p).map_err(|e| e.to_string())?;
        let rho = eigvals(&sys.h).map_err(|e| e.to_string())?.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max((rho - p.beta.sqrt()).abs());
    }
    check(worst < 1e-8, format!("max |rho - sqrt(beta)| = {worst:.2e}"))?;
    Ok(format!("max |rho - sqrt(beta)| = {worst:.2e}"))
}

fn c2_steady_state() -> Outcome {
    let mut worst = 0.0f64;
    for (a, b, p) in random_suite() {
        let sys = build_transformed(&a, &b, p).map_err(|e| e.to_string())?;
        let w = steady_state(&sys).map_err(|e| e.to_string())?;
        let expect = b.scale_real(p.coupling());
        worst = worst.max(w.slice(sys.n, sys.n).max_abs_diff(&expect));
    }
    check(worst < 1e-9, format!("max second-block deviation {worst:.2e}"))?;
    Ok(format!("max second-block deviation {worst:.2e}"))
}

fn diag_with_kappa(kappa: f64, n: usize) -> CMatrix {
    let s: Vec<f64> = (0..n).map(|j| kappa.powf(-(j as f64) / (n as f64 - 1.0))).collect();
    Matrix::from_real_diag(&s)
}

fn c3_step_scaling() -> Outcome {
    let delta = 1e-6;
    let mut ratios = Vec::new();
    for kappa in [10.0, 100.0, 1000.0] {
        let a = diag_with_kappa(kappa, 8);
        let b = Vector::from_real(&[1.0; 8]);
        let sys = build_transformed(&a, &b, derive_params(1.0, 1.0 / (kappa * kappa)).unwrap()).unwrap();
        let tr = mag_iterate_lean(&sys, &Vector::zeros(16), delta, 1_000_000).map_err(|e| e.to_string())?;
        ratios.push(tr.steps as f64 / (sys.params.kappa_hat * (1.0 / delta).ln()));
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let msg = format!("steps/(k ln 1/d) = {:.3?}", ratios);
    check(lo >= 0.25 && hi <= 4.0 && hi / lo < 2.0, msg.clone())?;
    Ok(msg)
}

/// Smallest `t` with `‖w(t) − w∞‖/‖w∞‖ < δ` for the gradient flow from zero.
fn gradient_time_to(a: &CMatrix, b: &CVector, delta: f64, t_hi: f64) -> Result<f64, String> {
    let g = build_gradient_flow(a, b).map_err(|e| e.to_string())?;
    let winf = g.steady_state().map_err(|e| e.to_string())?;
    let err = |t: f64| -> Result<f64, String> {
        let w = g.state_at(&Vector::zeros(a.cols()), t).map_err(|e| e.to_string())?;
        Ok((&w - &winf).norm2() / winf.norm2())
    };
    if err(t_hi)? >= delta {
        return Err(format!("gradient flow above delta at t = {t_hi}"));
    }
    let (mut lo, mut hi) = (0.0, t_hi);
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if err(mid)? < delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn c4_gradient_separation() -> Outcome {
    let delta = 1e-6;
    let mut rng = common::rng(4);
    let mut worst = f64::INFINITY;
    for _ in 0..3 {
        let (a, _) = common::matrix_with_sigma(&mut rng, 6, 0.01, 1.0);
        let b = common::random_vector(&mut rng, 6);
        let sys = build_transformed(&a, &b, derive_params(1.0, 1e-4).unwrap()).unwrap();
        let steps = mag_iterate_lean(&sys, &Vector::zeros(12), delta, 1_000_000).map_err(|e| e.to_string())?.steps;
        let t_grad = gradient_time_to(&a, &b, delta, 20.0 * (1.0 / delta).ln() / 1e-4)?;
        worst = worst.min(t_grad / steps as f64);
    }
    let msg = format!("min gradient time / MAG steps = {worst:.1}");
    check(worst >= 10.0, msg.clone())?;
    Ok(msg)
}

fn c5_fig1() -> Outcome {
    let p = fig1_preset::<f64>();
    let t_end = convergence_steps(p.params.kappa_hat, 1e-3) as f64;
    let run = run_fig1(&p, t_end, 400).map_err(|e| e.to_string())?;
    let expect = p.params.coupling() / ((1.0 - p.params.beta) * 0.1);
    let mag_changes = run.mag_ratio.sign_changes_after(0.05 * t_end);
    let (lo, hi) = run.mag_ratio.range_after(0.05 * t_end);
    let damped_last = run.damped_ratio.last().unwrap_or(f64::NAN).abs();
    let damped_peak = run.damped_ratio.max.abs().max(run.damped_ratio.min.abs());
    let aux = run.damped_steady.slice(2, 2).norm_inf();
    check(mag_changes == 0, format!("MAG ratio changes sign {mag_changes} times"))?;
    check(lo > 0.0 && hi <= 2.0 * expect, format!("MAG ratio band [{lo:.3}, {hi:.3}] vs limit {expect:.3}"))?;
    check(run.damped_ratio.sign_changes >= 2, format!("damped sign changes {}", run.damped_ratio.sign_changes))?;
    check(damped_last < 1e-2 * damped_peak, format!("damped ratio tail {damped_last:.2e} of peak {damped_peak:.2e}"))?;
    check(aux < 1e-10, format!("damped auxiliary steady state {aux:.2e}"))?;
    Ok(format!(
        "MAG band [{lo:.3}, {hi:.3}], damped sign changes {}, damped tail {damped_last:.1e}, aux {aux:.0e}",
        run.damped_ratio.sign_changes
    ))
}

fn c6_fig2() -> Outcome {
    let n = 16usize;
    let deltas: Vec<f64> = [0.5, 1.0, 1.5, 2.0].iter().map(|e| (n as f64).powf(-e)).collect();
    let rows = run_fig2::<f64>(n, &deltas).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for r in &rows {
        parts.push(format!("{:.1e}: {:.1e} <= {:.1e}", r.delta, r.mag_error, r.damped_error));
        check(r.mag_error <= r.damped_error, format!("delta {:.2e}: MAG {:.2e} > damped {:.2e}", r.delta, r.mag_error, r.damped_error))?;
    }
    Ok(parts.join(", "))
}

fn c7_scalar_schrodinger() -> Outcome {
    let g = Matrix::from_real_diag(&[-1.0]);
    let exact = (-1.0f64).exp();
    let hs = homogenize(&g, &Vector::from_real(&[0.0]), &Vector::from_real(&[1.0]), 1.0).map_err(|e| e.to_string())?;
    let sp = split(&hs);
    let mut errs = Vec::new();
    for n_p in [32, 64, 128, 256] {
        let grid = build_grid(&sp.h1, 1.0, n_p, (-10.0f64).exp()).map_err(|e| e.to_string())?;
        let st = evolve(&sp, &grid, &hs.w0_homo, 1.0).map_err(|e| e.to_string())?;
        let rec = recover_single_point(&st, &sp.h1).map_err(|e| e.to_string())?;
        errs.push((rec.value[0] - exact).norm());
    }
    check(errs[2] < 1e-2, format!("error at n_p=128 is {:.2e}", errs[2]))?;
    for w in errs.windows(2) {
        check(w[1] <= 1.1 * w[0], format!("errors not decreasing: {}", sci(&errs)))?;
    }
    let grid = build_grid(&sp.h1, 1.0, 128, (-10.0f64).exp()).map_err(|e| e.to_string())?;
    let st0 = evolve(&sp, &grid, &hs.w0_homo, 0.0).map_err(|e| e.to_string())?;
    let id_err = (recover_single_point(&st0, &sp.h1).map_err(|e| e.to_string())?.value[0].re - 1.0).abs();
    check(id_err < 1e-12, format!("recovery at t=0 off by {id_err:.2e}"))?;
    let n0 = warp_initial(&grid, &hs.w0_homo).fourier_norm();
    let mut drift = 0.0f64;
    for t in [0.5, 2.0, 10.0] {
        let st = evolve(&sp, &grid, &hs.w0_homo, t).map_err(|e| e.to_string())?;
        drift = drift.max((st.fourier_norm() - n0).abs() / n0);
    }
    check(drift < 1e-9, format!("Fourier norm drift {drift:.2e}"))?;
    Ok(format!("errors {}, t=0 {id_err:.0e}, norm drift {drift:.0e}", sci(&errs)))
}

fn c8_presets() -> Outcome {
    let mut worst: (f64, &str) = (0.0, "");
    let opts = PipelineOptions { with_oracle: false, ..PipelineOptions::default() };
    for name in PRESET_NAMES {
        let p = preset::<f64>(name).map_err(|e| e.to_string())?;
        let sys = p.problem.assemble().map_err(|e| e.to_string())?;
        let params = p.config.params(&sys.a).map_err(|e| e.to_string())?;
        let exact = direct_solve(&sys).map_err(|e| e.to_string())?;
        let tol = p.config.delta.max(1e-2);
        let (u, _) = solve_mag(&sys.a, &sys.b, params, p.config.delta).map_err(|e| format!("{name}: {e}"))?;
        let e_mag = u.rel_max_err(&exact);
        let out = pipeline_with(&sys.a, &sys.b, params, p.config.delta, p.config.n_p, &opts).map_err(|e| format!("{name}: {e}"))?;
        let e_schro = out.u.rel_max_err(&exact);
        check(e_mag <= tol, format!("{name}: MAG error {e_mag:.2e} > {tol:.0e}"))?;
        check(e_schro <= tol, format!("{name}: pipeline error {e_schro:.2e} > {tol:.0e}"))?;
        for e in [e_mag, e_schro] {
            if e > worst.0 {
                worst = (e, name);
            }
        }
    }
    Ok(format!("{} presets, worst error {:.2e} ({})", PRESET_NAMES.len(), worst.0, worst.1))
}

/// Dilation of `reference + E` with the claim `ε = ‖E‖₂`.
fn perturbed(rng: &mut rand_chacha::ChaCha8Rng, reference: &CMatrix, alpha: f64) -> Result<BlockEncoding<f64>, String> {
    let n = reference.rows();
    let e = common::matrix_with_norm(rng, n, 1e-3);
    let be = dilate(&(reference + &e), alpha).map_err(|e| e.to_string())?;
    Ok(be.with_eps(norm2(&e).map_err(|e| e.to_string())?))
}

fn c9_block_encoding() -> Outcome {
    let uc = u_c::<f64>();
    let uc_err = verify(&uc, &ket0_bra1()).map_err(|e| e.to_string())?;
    check(uc_err == 0.0, format!("U_c error {uc_err:.2e}"))?;
    let mut rng = common::rng(9);
    let mut worst_dilation = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(1..=8);
        let a = common::random_matrix(&mut rng, n, n);
        let alpha = norm2(&a).unwrap() * rng.gen_range(1.0..2.0);
        let be = dilate(&a, alpha).map_err(|e| e.to_string())?;
        worst_dilation = worst_dilation.max(measure_eps(&be, &a).map_err(|e| e.to_string())?);
    }
    check(worst_dilation <= 1e-10, format!("dilation error {worst_dilation:.2e}"))?;
    let mut worst_ratio = 0.0f64;
    let mut note = |measured: f64, claimed: f64, what: &str| -> Result<(), String> {
        worst_ratio = worst_ratio.max(measured / claimed);
        check(measured <= claimed * (1.0 + 1e-9) + 1e-12, format!("{what}: measured {measured:.3e} > claimed {claimed:.3e}"))
    };
    for _ in 0..20 {
        let n = rng.gen_range(1..=8);
        let (a1, a2) = (rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0));
        let r1 = common::matrix_with_norm(&mut rng, n, 0.9 * a1);
        let r2 = common::matrix_with_norm(&mut rng, n, 0.9 * a2);
        let e1 = perturbed(&mut rng, &r1, a1)?;
        let e2 = perturbed(&mut rng, &r2, a2)?;
        let p = product(&e1, &e2).map_err(|e| e.to_string())?;
        note(measure_eps(&p, &(&r1 * &r2)).map_err(|e| e.to_string())?, p.eps, "product")?;

        let r2s = common::matrix_with_norm(&mut rng, n, 0.9 * a1);
        let e2s = perturbed(&mut rng, &r2s, a1)?;
        let k = rng.gen_range(2..=3);
        let mut y: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l1: f64 = y.iter().map(|v| v.abs()).sum();
        let scale = rng.gen_range(0.3..1.0) / l1;
        y.iter_mut().for_each(|v| *v *= scale);
        let ops: Vec<&BlockEncoding<f64>> = [&e1, &e2s, &e1][..k].to_vec();
        let refs = [&r1, &r2s, &r1];
        let pair = build_state_prep_pair(&y).map_err(|e| e.to_string())?;
        let s = linear_combination(&ops, &pair).map_err(|e| e.to_string())?;
        let mut reference = Matrix::zeros(n, n);
        for (yk, rk) in y.iter().zip(refs) {
            reference = &reference + &rk.scale_real(*yk);
        }
        note(measure_eps(&s, &reference).map_err(|e| e.to_string())?, s.eps, "sum")?;

        let m = rng.gen_range(1..=3);
        let r3 = common::matrix_with_norm(&mut rng, m, 0.9 * a2);
        let e3 = perturbed(&mut rng, &r3, a2)?;
        let t = tensor(&e1, &e3);
        note(measure_eps(&t, &kron(&r1, &r3)).map_err(|e| e.to_string())?, t.eps, "tensor")?;
    }
    Ok(format!("U_c exact, dilations {worst_dilation:.1e}, worst measured/claimed {worst_ratio:.3}"))
}

fn c10_complexity() -> Outcome {
    let six = |got: f64, oracle: f64, what: &str| -> Result<(), String> {
        check((got - oracle).abs() <= 5e-7 * oracle.abs(), format!("{what}: {got} vs {oracle}"))
    };
    let l = 6000f64.ln();
    six(queries(60.0, 0.01).map_err(|e| e.to_string())?, 60.0 * l / l.ln(), "queries(60, 0.01)")?;
    let e2 = std::f64::consts::E.powi(2);
    six(queries(e2, 1.0).map_err(|e| e.to_string())?, 2.0 * e2 / 2f64.ln(), "queries(e^2, 1)")?;
    six(repetitions(10.0, 100.0, 0.01), 100f64.ln() * 1e4, "repetitions")?;
    six(repetitions(1.0, 1.0, (-1.0f64).exp()), 1.0, "repetitions unit")?;
    six(eta0(0.1, 0.0, 10.0, 2.0), 2.0, "eta0")?;
    six(eta0(0.5, 3.0, 4.0, 0.0), 1.5, "eta0 t=0 drive")?;
    let a = Matrix::from_real_diag(&[10.0, 0.1]);
    let s = SystemSummary::from_matrix(&a, 100.0, 0.01, 128).map_err(|e| e.to_string())?;
    let est = |m| method_complexity(m, &s, DNorm::LogNp).map(|r| r.estimate).map_err(|e| e.to_string());
    let (g, d, m) = (est(Method::Gradient)?, est(Method::Damped)?, est(Method::Mag)?);
    six(m, 100f64.ln().powi(2) * 7.0 * 100.0, "MAG estimate")?;
    check(g >= d && d >= m, format!("ordering violated: {g:.3e}, {d:.3e}, {m:.3e}"))?;
    Ok(format!("queries {:.4}, MAG estimate {m:.1}, gradient/damped/MAG {g:.3e} >= {d:.3e} >= {m:.3e}", queries(60.0, 0.01).unwrap()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("1 spectral radius identity", Duration::from_secs(10), c1_spectral_radius),
        ("2 steady-state second block", Duration::from_secs(10), c2_steady_state),
        ("3 convergence-step scaling", Duration::from_secs(60), c3_step_scaling),
        ("4 gradient vs MAG separation", Duration::from_secs(60), c4_gradient_separation),
        ("5 first-figure ratios", Duration::from_secs(30), c5_fig1),
        ("6 second-figure errors", Duration::from_secs(60), c6_fig2),
        ("7 scalar Schrodingerization", Duration::from_secs(60), c7_scalar_schrodinger),
        ("8 PDE presets (MAG + pipeline)", Duration::from_secs(300), c8_presets),
        ("9 block-encoding suite", Duration::from_secs(30), c9_block_encoding),
        ("10 complexity estimators", Duration::from_secs(1), c10_complexity),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let t0 = Instant::now();
        let res = f();
        let dt = t0.elapsed();
        let res = match res {
            Ok(m) if dt > budget => Err(format!("{m}; over budget {budget:?}")),
            r => r,
        };
        match res {
            Ok(m) => println!("PASS  {name:<34} {:>9.3}s  {m}", dt.as_secs_f64()),
            Err(m) => {
                failed += 1;
                println!("FAIL  {name:<34} {:>9.3}s  {m}", dt.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", 10 - failed, 10);
    if failed > 0 {
        std::process::exit(1);
    }
}
