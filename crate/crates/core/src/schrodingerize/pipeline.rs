//! End-to-end solve of `A u = b` through the Schrödingerized MAG ODE.
//!
//! The transformed system decouples along the right singular vectors of `A`:
//! with `A v_j = σ_j u_j` and `b̃ = U† b`, the state pairs `(x̃_j, ỹ_j)` obey
//! independent 2×2 ODEs. Each pair is homogenized into a 4×4 system and
//! evolved mode by mode, which keeps the cost linear in `n · n_p`.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{transport_grid, PGrid, TransportGridSpec};
use super::{
    admissible_index, default_gamma_f, evolve, homogenize, integral_recover_from, recover_at, split, to_ode,
    trapezoid_weights, FftPair, RecoveryMethod, SchroError,
};
use crate::mag::{build_transformed, convergence_steps, MagError, MagParams};
use crate::numkit::{direct_solve, eigh, small_eigh, small_unitary_apply, LinearSystem, Matrix, SmallMat, Vector};
use crate::scalar::{cr, Real, C};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PipelineOptions<T: Real> {
    pub recovery: RecoveryMethod,
    pub grid: TransportGridSpec<T>,
    /// `γ_F` of each block is this multiple of the block's own decay margin.
    pub gamma_scale: T,
    /// Fixed `γ_F` for every block, replacing the scaled margin.
    pub gamma_f: Option<T>,
    /// Overrides the evolution time `convergence_steps(κ̂, δ)`.
    pub t_end: Option<T>,
    /// Compare against the direct solve and fill `residual_vs_oracle`.
    pub with_oracle: bool,
}

impl<T: Real> Default for PipelineOptions<T> {
    fn default() -> Self {
        Self {
            recovery: RecoveryMethod::Integral,
            grid: TransportGridSpec::default(),
            gamma_scale: T::of(0.1),
            gamma_f: None,
            t_end: None,
            with_oracle: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub t_end: f64,
    /// Largest grid used by any block.
    pub n_p: usize,
    pub p_left: f64,
    pub p_right: f64,
    pub p_diamond: f64,
    pub k_star: usize,
    pub recovery_method: &'static str,
    /// Relative max-norm error against the direct solve.
    pub residual_vs_oracle: Option<f64>,
    pub blocks: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput<T: Real> {
    pub u: Vector<T>,
    pub report: PipelineReport,
}

struct BlockResult<T: Real> {
    x: C<T>,
    grid: PGrid<T>,
    p_diamond: T,
    k_star: usize,
}

fn small_from<T: Real>(m: &Matrix<T>) -> SmallMat<T, 4> {
    let mut s = [[cr(T::zero()); 4]; 4];
    for (i, row) in s.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z = m[(i, j)];
        }
    }
    s
}

/// Evolves one decoupled pair and recovers its `x̃` component.
fn solve_block<T: Real>(
    sigma: T,
    bt: C<T>,
    p: &MagParams<T>,
    t: T,
    n_p_min: usize,
    opts: &PipelineOptions<T>,
) -> Result<BlockResult<T>, SchroError> {
    let (alpha, beta) = (p.alpha, p.beta);
    let c = p.coupling();
    let decay = (alpha * sigma * sigma).min(T::one() - beta);
    let gamma = opts.gamma_f.unwrap_or(opts.gamma_scale * decay);
    let mut gm = Matrix::zeros(2, 2);
    gm[(0, 0)] = cr(-(alpha * sigma * sigma));
    gm[(0, 1)] = cr(-(c * sigma));
    gm[(1, 0)] = cr(c * sigma);
    gm[(1, 1)] = cr(beta - T::one());
    let drive = Vector::from_vec(vec![bt * (alpha * sigma), cr(T::zero())]);
    let hs = homogenize(&gm, &drive, &Vector::zeros(2), gamma)?;
    let sp = split(&hs);
    let h1 = small_from(&sp.h1);
    let h2 = small_from(&sp.h2);
    let (lam, _) = small_eigh(&h1, None);
    let lmin = lam.iter().copied().fold(T::infinity(), T::min);
    let lmax = lam.iter().copied().fold(T::neg_infinity(), T::max);
    let grid = transport_grid(lmin, lmax, t, n_p_min, &opts.grid)?;
    let n = grid.n_p;
    let fft = FftPair::new(n);
    let mut phi: Vec<C<T>> = (0..n).map(|k| cr((-grid.point(k).abs()).exp())).collect();
    fft.forward(&mut phi);
    let w0 = [hs.w0_homo[0], hs.w0_homo[1], hs.w0_homo[2], hs.w0_homo[3]];
    let mut xs = vec![cr(T::zero()); n];
    let mut warm: Option<SmallMat<T, 4>> = None;
    // increasing ϑ so consecutive eigenbases are close
    for j in (n / 2..n).chain(0..n / 2) {
        let theta = grid.theta_bin(j);
        let mut hk = [[cr(T::zero()); 4]; 4];
        for r in 0..4 {
            for s in 0..4 {
                hk[r][s] = h1[r][s] * theta - h2[r][s];
            }
        }
        let (vals, vecs) = small_eigh(&hk, warm.as_ref());
        let x0 = w0.map(|z| z * phi[j]);
        xs[j] = small_unitary_apply(&vals, &vecs, t, &x0)[0];
        warm = Some(vecs);
    }
    fft.inverse(&mut xs);
    let p_diamond = super::p_threshold_from(lmax, t);
    let k_star = admissible_index(&grid, p_diamond)?;
    let x = match opts.recovery {
        RecoveryMethod::SinglePoint => xs[k_star] * grid.point(k_star).exp(),
        RecoveryMethod::Integral => {
            let count = n - k_star;
            if count == 1 {
                xs[k_star] * grid.point(k_star).exp()
            } else {
                let mut acc = cr(T::zero());
                let mut norm = T::zero();
                for (i, wgt) in trapezoid_weights(count, grid.dp()).enumerate() {
                    acc += xs[k_star + i] * wgt;
                    norm += wgt * (-grid.point(k_star + i)).exp();
                }
                acc / norm
            }
        }
    };
    Ok(BlockResult { x, grid, p_diamond, k_star })
}

fn oracle_error<T: Real>(a: &Matrix<T>, b: &Vector<T>, u: &Vector<T>) -> Option<f64> {
    let sys = LinearSystem::new(a.clone(), b.clone()).ok()?;
    let exact = direct_solve(&sys).ok()?;
    Some(u.rel_max_err(&exact).to_f64_lossy())
}

fn check_inputs<T: Real>(a: &Matrix<T>, b: &Vector<T>, delta: T) -> Result<(), SchroError> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(SchroError::Mag(MagError::Dimension(format!(
            "matrix {}x{}, rhs {}",
            a.rows(),
            a.cols(),
            b.len()
        ))));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(SchroError::Mag(MagError::InvalidDelta(delta.to_f64_lossy())));
    }
    Ok(())
}

/// Recovered solution with default options.
pub fn pipeline<T: Real>(
    a: &Matrix<T>,
    b: &Vector<T>,
    params: MagParams<T>,
    delta: T,
    n_p: usize,
) -> Result<Vector<T>, SchroError> {
    Ok(pipeline_with(a, b, params, delta, n_p, &PipelineOptions::default())?.u)
}

pub fn pipeline_with<T: Real>(
    a: &Matrix<T>,
    b: &Vector<T>,
    params: MagParams<T>,
    delta: T,
    n_p: usize,
    opts: &PipelineOptions<T>,
) -> Result<PipelineOutput<T>, SchroError> {
    check_inputs(a, b, delta)?;
    let t = opts.t_end.unwrap_or_else(|| T::of_usize(convergence_steps(params.kappa_hat, delta)));
    let gram = a.gram();
    let eg = eigh(&gram)?;
    let n = a.rows();
    let mut sigmas = Vec::with_capacity(n);
    let mut ucols = Vec::with_capacity(n);
    for j in 0..n {
        let s2 = eg.values[j];
        if !(s2 > T::zero()) {
            return Err(SchroError::Invalid("matrix is singular".into()));
        }
        let s = s2.sqrt();
        let v = eg.vectors.column(j);
        ucols.push(a.matvec(&v)?.scale_real(T::one() / s));
        sigmas.push(s);
    }
    let bt: Vec<C<T>> = ucols.iter().map(|u| u.dot(b)).collect();
    let blocks: Vec<BlockResult<T>> = (0..n)
        .into_par_iter()
        .map(|j| solve_block(sigmas[j], bt[j], &params, t, n_p, opts))
        .collect::<Result<_, _>>()?;
    let scale = T::one() / (T::one() - params.beta);
    let ut: Vector<T> = blocks.iter().map(|r| r.x * scale).collect();
    let u = eg.vectors.matvec(&ut)?;
    if !u.is_finite() {
        return Err(SchroError::Num(crate::numkit::NumError::NonFinite("recovered solution")));
    }
    let widest = blocks.iter().max_by_key(|r| r.grid.n_p).expect("at least one block");
    let report = PipelineReport {
        t_end: t.to_f64_lossy(),
        n_p: widest.grid.n_p,
        p_left: blocks.iter().map(|r| r.grid.p_left.to_f64_lossy()).fold(f64::INFINITY, f64::min),
        p_right: blocks.iter().map(|r| r.grid.p_right.to_f64_lossy()).fold(f64::NEG_INFINITY, f64::max),
        p_diamond: blocks.iter().map(|r| r.p_diamond.to_f64_lossy()).fold(0.0, f64::max),
        k_star: widest.k_star,
        recovery_method: opts.recovery.name(),
        residual_vs_oracle: if opts.with_oracle { oracle_error(a, b, &u) } else { None },
        blocks: n,
    };
    Ok(PipelineOutput { u, report })
}

/// Dense variant: homogenizes the full `2n` transformed ODE with one `γ_F`
/// and evolves every Fourier mode with a dense eigendecomposition. Cost grows
/// as `n_p · n³`; meant for small systems and as a cross-check of the blocked path.
pub fn pipeline_dense<T: Real>(
    a: &Matrix<T>,
    b: &Vector<T>,
    params: MagParams<T>,
    delta: T,
    n_p: usize,
    opts: &PipelineOptions<T>,
) -> Result<(PipelineOutput<T>, Vec<Vector<T>>, PGrid<T>), SchroError> {
    check_inputs(a, b, delta)?;
    let t = opts.t_end.unwrap_or_else(|| T::of_usize(convergence_steps(params.kappa_hat, delta)));
    let sys = build_transformed(a, b, params)?;
    let (g, f) = to_ode(&sys);
    let gamma = opts.gamma_f.unwrap_or_else(|| default_gamma_f(&params) * (opts.gamma_scale / T::of(0.1)));
    let hs = homogenize(&g, &f, &Vector::zeros(g.rows()), gamma)?;
    let sp = split(&hs);
    let e1 = eigh(&sp.h1)?;
    let grid = transport_grid(e1.min(), e1.max(), t, n_p, &opts.grid)?;
    let state = evolve(&sp, &grid, &hs.w0_homo, t)?;
    let p_diamond = super::p_threshold_from(e1.max(), t);
    let k_star = admissible_index(&grid, p_diamond)?;
    let warped = state.warped();
    let w = match opts.recovery {
        RecoveryMethod::SinglePoint => recover_at(&warped, &grid, k_star),
        RecoveryMethod::Integral => integral_recover_from(&warped, &grid, k_star),
    };
    let u = sys.solution_of(&w);
    let report = PipelineReport {
        t_end: t.to_f64_lossy(),
        n_p: grid.n_p,
        p_left: grid.p_left.to_f64_lossy(),
        p_right: grid.p_right.to_f64_lossy(),
        p_diamond: p_diamond.to_f64_lossy(),
        k_star,
        recovery_method: opts.recovery.name(),
        residual_vs_oracle: if opts.with_oracle { oracle_error(a, b, &u) } else { None },
        blocks: 1,
    };
    Ok((PipelineOutput { u, report }, warped, grid))
}
