//! Momentum-accelerated gradient: parameters, the transformed 2n-dimensional
//! iteration, spectral checks, termination and relative convergence.

use serde::Serialize;

use crate::numkit::{eigvals, Lu, Matrix, NumError, Vector};
use crate::scalar::{cr, Real, C};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MagError {
    #[error("invalid spectrum bounds: need 0 < mu_hat <= l_hat, got l_hat={l_hat}, mu_hat={mu_hat}")]
    InvalidBounds { l_hat: f64, mu_hat: f64 },
    #[error("delta must lie in (0,1), got {0}")]
    InvalidDelta(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no convergence within {steps} steps (final residual {residual:.3e})")]
    NotConverged { steps: usize, residual: f64 },
    #[error("spectral radius {rho:.12} differs from sqrt(beta) = {sqrt_beta:.12}; spectrum escapes [mu_hat, l_hat]")]
    SpectralRadius { rho: f64, sqrt_beta: f64 },
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Step size and momentum derived from spectrum bounds of `A†A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MagParams<T: Real> {
    pub l_hat: T,
    pub mu_hat: T,
    pub alpha: T,
    pub beta: T,
    pub kappa_hat: T,
}

impl<T: Real> MagParams<T> {
    /// `√(αβ)`, the coupling between the two halves of the transformed state.
    pub fn coupling(&self) -> T {
        (self.alpha * self.beta).sqrt()
    }

    /// `min{α μ̂, 1 − β}`: the contraction margin of the Hermitian part.
    pub fn margin(&self) -> T {
        (self.alpha * self.mu_hat).min(T::one() - self.beta)
    }
}

/// `α = 4/(√L̂+√μ̂)²`, `β = ((κ̂−1)/(κ̂+1))²`, `κ̂ = √(L̂/μ̂)`.
pub fn derive_params<T: Real>(l_hat: T, mu_hat: T) -> Result<MagParams<T>, MagError> {
    if !(mu_hat > T::zero() && mu_hat <= l_hat && l_hat.is_finite()) {
        return Err(MagError::InvalidBounds { l_hat: l_hat.to_f64_lossy(), mu_hat: mu_hat.to_f64_lossy() });
    }
    let kappa_hat = (l_hat / mu_hat).sqrt();
    let s = l_hat.sqrt() + mu_hat.sqrt();
    let alpha = T::of(4.0) / (s * s);
    let r = (kappa_hat - T::one()) / (kappa_hat + T::one());
    Ok(MagParams { l_hat, mu_hat, alpha, beta: r * r, kappa_hat })
}

/// Parameters from singular-value bounds `σ̂_min ≤ σ_min`, `σ̂_max ≥ σ_max`.
pub fn params_from_sigma<T: Real>(sigma_min_hat: T, sigma_max_hat: T) -> Result<MagParams<T>, MagError> {
    derive_params(sigma_max_hat * sigma_max_hat, sigma_min_hat * sigma_min_hat)
}

/// The pair `(H, F)` with `w_{n+1} = H w_n + F`.
#[derive(Clone, Debug)]
pub struct TransformedSystem<T: Real> {
    pub a: Matrix<T>,
    pub b: Vector<T>,
    pub h: Matrix<T>,
    pub f: Vector<T>,
    pub n: usize,
    pub params: MagParams<T>,
}

/// `H = [[I−αA†A, −√(αβ)A†], [√(αβ)A, βI]]`, `F = [αA†b; 0]`.
pub fn build_transformed<T: Real>(
    a: &Matrix<T>,
    b: &Vector<T>,
    p: MagParams<T>,
) -> Result<TransformedSystem<T>, MagError> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(MagError::Dimension(format!("A is {}x{}, b has {} entries", a.rows(), a.cols(), b.len())));
    }
    let n = a.rows();
    let c = cr(p.coupling());
    let ah = a.adjoint();
    let top_left = &Matrix::identity(n) - &a.gram().scale_real(p.alpha);
    let top_right = ah.scale(-c);
    let bottom_left = a.scale(c);
    let bottom_right = Matrix::identity(n).scale_real(p.beta);
    let h = Matrix::from_blocks(&[
        vec![Some(&top_left), Some(&top_right)],
        vec![Some(&bottom_left), Some(&bottom_right)],
    ])?;
    let f = a.adjoint_matvec(b)?.scale_real(p.alpha).concat(&Vector::zeros(n));
    Ok(TransformedSystem { a: a.clone(), b: b.clone(), h, f, n, params: p })
}

impl<T: Real> TransformedSystem<T> {
    /// `H w + F`, evaluated through `A` (two n×n products instead of one 2n×2n).
    pub fn step(&self, w: &Vector<T>) -> Vector<T> {
        let n = self.n;
        let p = &self.params;
        let c = cr(p.coupling());
        let x = w.slice(0, n);
        let y = w.slice(n, n);
        let ax = &self.a * &x;
        // top: x − A†(αAx + c y) + F_top ; bottom: c A x + β y
        let mut inner = ax.scale_real(p.alpha);
        inner.axpy(c, &y);
        let back = self.a.adjoint_matvec(&inner).expect("square system");
        let mut top = &x - &back;
        top = &top + &self.f.slice(0, n);
        let mut bottom = ax.scale(c);
        bottom.axpy(cr(p.beta), &y);
        top.concat(&bottom)
    }

    /// Maps a transformed state to the solution estimate `u = x/(1−β)`.
    pub fn solution_of(&self, w: &Vector<T>) -> Vector<T> {
        w.slice(0, self.n).scale_real(T::one() / (T::one() - self.params.beta))
    }

    /// Largest eigenvalue of `(H+H†)/2 − I`.
    pub fn hermitian_part_max(&self) -> Result<T, MagError> {
        let s = &self.h.hermitian_part() - &Matrix::identity(2 * self.n);
        Ok(crate::numkit::eigh(&s)?.max())
    }
}

/// Residual history of one run.
#[derive(Clone, Debug)]
pub struct IterationTrace<T: Real> {
    pub steps: usize,
    /// Recorded states; all iterates when recording, else only the final one.
    pub states: Vec<Vector<T>>,
    /// `‖w_n − w_∞‖₂ / ‖w_0 − w_∞‖₂`, starting with 1.
    pub residuals: Vec<T>,
    pub relative_residuals: Option<Vec<T>>,
    pub converged: bool,
}

impl<T: Real> IterationTrace<T> {
    pub fn final_state(&self) -> &Vector<T> {
        self.states.last().expect("trace holds at least one state")
    }

    pub fn final_residual(&self) -> T {
        *self.residuals.last().expect("trace holds at least one residual")
    }
}

fn check_delta<T: Real>(delta: T) -> Result<(), MagError> {
    if delta > T::zero() && delta < T::one() {
        Ok(())
    } else {
        Err(MagError::InvalidDelta(delta.to_f64_lossy()))
    }
}

fn run<T: Real>(
    sys: &TransformedSystem<T>,
    w0: &Vector<T>,
    delta: T,
    max_steps: usize,
    record: bool,
) -> Result<IterationTrace<T>, MagError> {
    check_delta(delta)?;
    if w0.len() != 2 * sys.n {
        return Err(MagError::Dimension(format!("w0 has {} entries, expected {}", w0.len(), 2 * sys.n)));
    }
    let winf = steady_state(sys)?;
    let d0 = (w0 - &winf).norm2();
    let mut states = vec![w0.clone()];
    let mut residuals = vec![T::one()];
    if d0 == T::zero() {
        return Ok(IterationTrace { steps: 0, states, residuals, relative_residuals: None, converged: true });
    }
    let mut w = w0.clone();
    for step in 1..=max_steps {
        w = sys.step(&w);
        let r = (&w - &winf).norm2() / d0;
        residuals.push(r);
        if record {
            states.push(w.clone());
        }
        if r < delta {
            if !record {
                states = vec![w];
            }
            return Ok(IterationTrace { steps: step, states, residuals, relative_residuals: None, converged: true });
        }
    }
    Err(MagError::NotConverged { steps: max_steps, residual: residuals.last().copied().unwrap_or(T::one()).to_f64_lossy() })
}

/// Iterates `w ← H w + F` until `‖w_n − w_∞‖/‖w_0 − w_∞‖ < δ`, recording
/// every state.
pub fn mag_iterate<T: Real>(
    sys: &TransformedSystem<T>,
    w0: &Vector<T>,
    delta: T,
    max_steps: usize,
) -> Result<IterationTrace<T>, MagError> {
    run(sys, w0, delta, max_steps, true)
}

/// As [`mag_iterate`] but keeps only the final state.
pub fn mag_iterate_lean<T: Real>(
    sys: &TransformedSystem<T>,
    w0: &Vector<T>,
    delta: T,
    max_steps: usize,
) -> Result<IterationTrace<T>, MagError> {
    run(sys, w0, delta, max_steps, false)
}

/// Fallback termination without the steady state:
/// stops when `‖w_{n+1} − w_n‖/‖w_n‖ < δ`. Residuals hold the step ratios.
pub fn mag_iterate_residual<T: Real>(
    sys: &TransformedSystem<T>,
    w0: &Vector<T>,
    delta: T,
    max_steps: usize,
) -> Result<IterationTrace<T>, MagError> {
    check_delta(delta)?;
    if w0.len() != 2 * sys.n {
        return Err(MagError::Dimension(format!("w0 has {} entries, expected {}", w0.len(), 2 * sys.n)));
    }
    let mut w = w0.clone();
    let mut residuals = vec![T::one()];
    for step in 1..=max_steps {
        let next = sys.step(&w);
        let nw = next.norm2();
        let r = if nw > T::zero() { (&next - &w).norm2() / nw } else { T::zero() };
        residuals.push(r);
        w = next;
        if r < delta {
            return Ok(IterationTrace { steps: step, states: vec![w], residuals, relative_residuals: None, converged: true });
        }
    }
    Err(MagError::NotConverged { steps: max_steps, residual: residuals.last().copied().unwrap_or(T::one()).to_f64_lossy() })
}

/// `(I − H)⁻¹ F`.
pub fn steady_state<T: Real>(sys: &TransformedSystem<T>) -> Result<Vector<T>, MagError> {
    let m = &Matrix::identity(2 * sys.n) - &sys.h;
    let lu = Lu::factor(&m)?;
    Ok(lu.solve(&sys.f)?)
}

/// Both roots of `λ² − (1+β−ασ²)λ + β = 0`.
pub fn lambda_pm<T: Real>(sigma: T, p: &MagParams<T>) -> (C<T>, C<T>) {
    let tr = T::one() + p.beta - p.alpha * sigma * sigma;
    let disc = tr * tr - T::of(4.0) * p.beta;
    let half = T::of(0.5);
    if disc >= T::zero() {
        let s = disc.sqrt();
        (cr((tr + s) * half), cr((tr - s) * half))
    } else {
        let s = (-disc).sqrt();
        (C::new(tr * half, s * half), C::new(tr * half, -s * half))
    }
}

/// `max |eig(H)|`, erroring when it departs from `√β` by more than `tol`.
pub fn spectral_radius_check_tol<T: Real>(sys: &TransformedSystem<T>, tol: T) -> Result<T, MagError> {
    let rho = eigvals(&sys.h)?.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let sb = sys.params.beta.sqrt();
    if (rho - sb).abs() > tol {
        return Err(MagError::SpectralRadius { rho: rho.to_f64_lossy(), sqrt_beta: sb.to_f64_lossy() });
    }
    Ok(rho)
}

/// [`spectral_radius_check_tol`] at tolerance `1e-8`.
pub fn spectral_radius_check<T: Real>(sys: &TransformedSystem<T>) -> Result<T, MagError> {
    spectral_radius_check_tol(sys, T::of(1e-8))
}

/// `⌈c κ̂ ln(1/δ)⌉`.
pub fn convergence_steps_with<T: Real>(kappa_hat: T, delta: T, c: T) -> usize {
    let v = (c * kappa_hat * (T::one() / delta).ln()).to_f64_lossy();
    // guard against 1.0000000000000002 style round-up
    let r = v.round();
    if (v - r).abs() < 1e-9 * v.max(1.0) {
        r.max(0.0) as usize
    } else {
        v.ceil().max(0.0) as usize
    }
}

/// `⌈κ̂ ln(1/δ)⌉`.
pub fn convergence_steps<T: Real>(kappa_hat: T, delta: T) -> usize {
    convergence_steps_with(kappa_hat, delta, T::one())
}

/// Componentwise relative residuals against the steady state.
#[derive(Clone, Debug)]
pub struct RelativeTrace<T: Real> {
    /// `‖Δŵ_n‖/‖Δŵ_0‖`, absent when `κ₂(w_∞)` is flagged infinite.
    pub values: Option<Vec<T>>,
    /// `max|w_∞,i| / min|w_∞,i|`; `None` marks a near-zero component.
    pub kappa2: Option<T>,
}

/// Relative trace of the recorded states; requires [`mag_iterate`] states.
pub fn relative_trace<T: Real>(sys: &TransformedSystem<T>, trace: &IterationTrace<T>) -> Result<RelativeTrace<T>, MagError> {
    let winf = steady_state(sys)?;
    Ok(relative_trace_against(&winf, &trace.states))
}

/// Relative trace of arbitrary states against a given steady state.
pub fn relative_trace_against<T: Real>(winf: &Vector<T>, states: &[Vector<T>]) -> RelativeTrace<T> {
    let norm = winf.norm2();
    let thresh = T::of(1e-12) * norm;
    let mags: Vec<T> = winf.iter().map(|z| z.norm()).collect();
    let lo = mags.iter().copied().fold(T::infinity(), T::min);
    let hi = mags.iter().copied().fold(T::zero(), T::max);
    if lo <= thresh || norm == T::zero() {
        return RelativeTrace { values: None, kappa2: None };
    }
    let scaled = |w: &Vector<T>| -> T {
        w.iter().zip(winf.iter()).map(|(a, b)| ((*a - *b) / *b).norm_sqr()).sum::<T>().sqrt()
    };
    let values = states.first().map(|w0| {
        let d0 = scaled(w0);
        states
            .iter()
            .map(|w| if d0 > T::zero() { scaled(w) / d0 } else { T::zero() })
            .collect()
    });
    RelativeTrace { values, kappa2: Some(hi / lo) }
}

/// Solves `A u = b` from `w_0 = 0`, stopping once the top block is within
/// `δ` of the steady state in relative max-norm. Residuals hold that error.
pub fn solve_mag<T: Real>(
    a: &Matrix<T>,
    b: &Vector<T>,
    params: MagParams<T>,
    delta: T,
) -> Result<(Vector<T>, IterationTrace<T>), MagError> {
    check_delta(delta)?;
    let sys = build_transformed(a, b, params)?;
    let top = steady_state(&sys)?.slice(0, sys.n);
    let max_steps = 8 * convergence_steps(params.kappa_hat, delta).max(1) + 64;
    let mut w = Vector::zeros(2 * sys.n);
    let mut residuals = vec![T::one()];
    for step in 0..=max_steps {
        let r = w.slice(0, sys.n).rel_max_err(&top);
        if step > 0 {
            residuals.push(r);
        }
        if r < delta || top.norm_inf() == T::zero() {
            let u = sys.solution_of(&w);
            return Ok((u, IterationTrace { steps: step, states: vec![w], residuals, relative_residuals: None, converged: true }));
        }
        w = sys.step(&w);
    }
    Err(MagError::NotConverged { steps: max_steps, residual: residuals.last().copied().unwrap_or(T::one()).to_f64_lossy() })
}
