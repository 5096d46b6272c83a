//! Gradient flow and the damped dynamical system as linear ODEs, integrated
//! exactly through the matrix exponential of the augmented system.

use serde::Serialize;

use crate::mag::{build_transformed, params_from_sigma, MagParams, TransformedSystem};
use crate::numkit::{expm, sigma_extremes, Lu, Matrix, NumError, Vector};
use crate::scalar::{cr, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("gamma = {gamma} outside (0, 2*sigma_min) = (0, {limit})")]
    GammaOutOfRange { gamma: f64, limit: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Mag(#[from] crate::mag::MagError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    Gradient,
    Damped,
    MagOde,
}

/// `dw/dt = G w + d`.
#[derive(Clone, Debug)]
pub struct FlowSystem<T: Real> {
    pub generator: Matrix<T>,
    pub drive: Vector<T>,
    pub kind: FlowKind,
    pub gamma: Option<T>,
}

impl<T: Real> FlowSystem<T> {
    pub fn dim(&self) -> usize {
        self.drive.len()
    }

    /// `−G⁻¹ d`.
    pub fn steady_state(&self) -> Result<Vector<T>, FlowError> {
        let lu = Lu::factor(&self.generator)?;
        Ok(-&lu.solve(&self.drive)?)
    }

    /// Exact state at time `t`.
    pub fn state_at(&self, w0: &Vector<T>, t: T) -> Result<Vector<T>, FlowError> {
        let step = expm(&self.augmented().scale_real(t))?;
        let z = step.matvec(&w0.concat(&Vector::from_real(&[1.0])))?;
        Ok(z.slice(0, self.dim()))
    }

    /// `[[G, d], [0, 0]]`.
    fn augmented(&self) -> Matrix<T> {
        let m = self.dim();
        let mut aug = Matrix::zeros(m + 1, m + 1);
        aug.set_submatrix(0, 0, &self.generator);
        for i in 0..m {
            aug[(i, m)] = self.drive[i];
        }
        aug
    }
}

/// `du/dt = A†b − A†A u`.
pub fn build_gradient_flow<T: Real>(a: &Matrix<T>, b: &Vector<T>) -> Result<FlowSystem<T>, FlowError> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(FlowError::Dimension(format!("A is {}x{}, b has {} entries", a.rows(), a.cols(), b.len())));
    }
    Ok(FlowSystem { generator: -&a.gram(), drive: a.adjoint_matvec(b)?, kind: FlowKind::Gradient, gamma: None })
}

/// `J = [[0, −A†], [A, −γI]]`, `G = [0; −b]`, with `0 < γ < 2σ_min`.
pub fn build_damped<T: Real>(a: &Matrix<T>, b: &Vector<T>, gamma: T) -> Result<FlowSystem<T>, FlowError> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(FlowError::Dimension(format!("A is {}x{}, b has {} entries", a.rows(), a.cols(), b.len())));
    }
    let (smin, _) = sigma_extremes(a)?;
    let limit = T::of(2.0) * smin;
    if !(gamma > T::zero() && gamma < limit) {
        return Err(FlowError::GammaOutOfRange { gamma: gamma.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    build_damped_unchecked(a, b, gamma)
}

/// [`build_damped`] without the `γ < 2σ_min` check.
pub fn build_damped_unchecked<T: Real>(a: &Matrix<T>, b: &Vector<T>, gamma: T) -> Result<FlowSystem<T>, FlowError> {
    let n = a.rows();
    let ah = -&a.adjoint();
    let g = Matrix::identity(n).scale_real(-gamma);
    let j = Matrix::from_blocks(&[vec![None, Some(&ah)], vec![Some(a), Some(&g)]])?;
    let drive = Vector::zeros(n).concat(&-b);
    Ok(FlowSystem { generator: j, drive, kind: FlowKind::Damped, gamma: Some(gamma) })
}

/// `dw/dt = (H − I) w + F`.
pub fn build_mag_ode<T: Real>(sys: &TransformedSystem<T>) -> FlowSystem<T> {
    let (generator, drive) = crate::schrodingerize::to_ode(sys);
    FlowSystem { generator, drive, kind: FlowKind::MagOde, gamma: None }
}

/// States at `samples` uniformly spaced times in `[0, t_end]`.
pub fn integrate_flow<T: Real>(
    sys: &FlowSystem<T>,
    w0: &Vector<T>,
    t_end: T,
    samples: usize,
) -> Result<Vec<(T, Vector<T>)>, FlowError> {
    if !(t_end > T::zero()) || samples < 2 {
        return Err(FlowError::Invalid(format!("need t_end > 0 and samples >= 2, got {t_end}, {samples}")));
    }
    if w0.len() != sys.dim() {
        return Err(FlowError::Dimension(format!("w0 has {} entries, expected {}", w0.len(), sys.dim())));
    }
    let dt = t_end / T::of_usize(samples - 1);
    let step = expm(&sys.augmented().scale_real(dt))?;
    let mut z = w0.concat(&Vector::from_real(&[1.0]));
    let mut out = Vec::with_capacity(samples);
    out.push((T::zero(), w0.clone()));
    for k in 1..samples {
        z = step.matvec(&z)?;
        // keep the constant slot exact
        z[sys.dim()] = cr(T::one());
        out.push((dt * T::of_usize(k), z.slice(0, sys.dim())));
    }
    Ok(out)
}

/// Predicted time to reach `δ`: gradient `c ln(1/δ)/σ_min²`, damped
/// `c ln(1/δ)/σ_min`, MAG ODE `c κ̂ ln(1/δ)` with `σ_min` read as `κ̂`.
pub fn evolution_time_with<T: Real>(kind: FlowKind, spectral: T, delta: T, c: T) -> T {
    let l = (T::one() / delta).ln();
    match kind {
        FlowKind::Gradient => c * l / (spectral * spectral),
        FlowKind::Damped => c * l / spectral,
        FlowKind::MagOde => c * l * spectral,
    }
}

pub fn evolution_time<T: Real>(kind: FlowKind, spectral: T, delta: T) -> T {
    evolution_time_with(kind, spectral, delta, T::one())
}

/// Auxiliary/solved ratio along a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct RatioTrace<T: Real> {
    /// `(time, ratio)`; `None` marks a near-zero denominator.
    pub points: Vec<(T, Option<T>)>,
    pub sign_changes: usize,
    pub min: T,
    pub max: T,
}

impl<T: Real> RatioTrace<T> {
    /// Sign changes among samples with `time ≥ t0`.
    pub fn sign_changes_after(&self, t0: T) -> usize {
        count_sign_changes(self.points.iter().filter(|(t, _)| *t >= t0).filter_map(|(_, r)| *r))
    }

    /// `(min, max)` of the ratio among samples with `time ≥ t0`.
    pub fn range_after(&self, t0: T) -> (T, T) {
        self.points
            .iter()
            .filter(|(t, _)| *t >= t0)
            .filter_map(|(_, r)| *r)
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }

    pub fn last(&self) -> Option<T> {
        self.points.iter().rev().find_map(|(_, r)| *r)
    }
}

fn count_sign_changes<T: Real>(vals: impl Iterator<Item = T>) -> usize {
    let mut prev: Option<bool> = None;
    let mut n = 0;
    for v in vals {
        if v == T::zero() {
            continue;
        }
        let pos = v > T::zero();
        if let Some(p) = prev {
            if p != pos {
                n += 1;
            }
        }
        prev = Some(pos);
    }
    n
}

/// `Re(w[aux] / w[solved])` per sample; denominators below `1e-12` relative
/// to the trajectory's largest solved value are gaps.
pub fn auxiliary_ratio_trace<T: Real>(
    traj: &[(T, Vector<T>)],
    solved: usize,
    aux: usize,
) -> RatioTrace<T> {
    let scale = traj.iter().map(|(_, w)| w[solved].norm()).fold(T::zero(), T::max);
    let thresh = T::of(1e-12) * scale.max(T::min_positive_value());
    let points: Vec<(T, Option<T>)> = traj
        .iter()
        .map(|(t, w)| {
            let d = w[solved];
            if d.norm() <= thresh {
                (*t, None)
            } else {
                (*t, Some((w[aux] / d).re))
            }
        })
        .collect();
    let sign_changes = count_sign_changes(points.iter().filter_map(|(_, r)| *r));
    let (min, max) = points
        .iter()
        .filter_map(|(_, r)| *r)
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| (lo.min(r), hi.max(r)));
    RatioTrace { points, sign_changes, min, max }
}

/// The two-variable comparison system of the first figure: `A = diag(10, 0.1)`,
/// `b = [1, 1]`, bracketing bounds `σ̂_max = 10·1.05`, `σ̂_min = 0.1·0.95`,
/// `γ = 2σ̂_min`. The caption's literal `5×1.05` / `5×0.95` cannot bracket
/// the spectrum `{0.1, 10}`.
#[derive(Clone, Debug)]
pub struct Fig1Preset<T: Real> {
    pub a: Matrix<T>,
    pub b: Vector<T>,
    pub sigma_min_hat: T,
    pub sigma_max_hat: T,
    pub gamma: T,
    pub params: MagParams<T>,
}

pub fn fig1_preset<T: Real>() -> Fig1Preset<T> {
    let a = Matrix::from_real_diag(&[10.0, 0.1]);
    let b = Vector::from_real(&[1.0, 1.0]);
    let sigma_min_hat = T::of(0.1 * 0.95);
    let sigma_max_hat = T::of(10.0 * 1.05);
    let params = params_from_sigma(sigma_min_hat, sigma_max_hat).expect("valid bounds");
    Fig1Preset { a, b, sigma_min_hat, sigma_max_hat, gamma: T::of(2.0) * sigma_min_hat, params }
}

/// Trajectories of both methods on the first-figure preset over `[0, t_end]`.
pub struct Fig1Run<T: Real> {
    pub t_end: T,
    pub mag: Vec<(T, Vector<T>)>,
    pub damped: Vec<(T, Vector<T>)>,
    pub mag_ratio: RatioTrace<T>,
    pub damped_ratio: RatioTrace<T>,
    pub damped_steady: Vector<T>,
}

/// Runs both flows from zero; component 0 is the solved variable, component
/// `n` the auxiliary one.
pub fn run_fig1<T: Real>(p: &Fig1Preset<T>, t_end: T, samples: usize) -> Result<Fig1Run<T>, FlowError> {
    let n = p.b.len();
    let mag_sys = build_transformed(&p.a, &p.b, p.params)?;
    let mag_flow = build_mag_ode(&mag_sys);
    let damped = build_damped(&p.a, &p.b, p.gamma)?;
    let mag = integrate_flow(&mag_flow, &Vector::zeros(2 * n), t_end, samples)?;
    let damped_traj = integrate_flow(&damped, &Vector::zeros(2 * n), t_end, samples)?;
    let mag_ratio = auxiliary_ratio_trace(&mag, 0, n);
    let damped_ratio = auxiliary_ratio_trace(&damped_traj, 0, n);
    let damped_steady = damped.steady_state()?;
    Ok(Fig1Run { t_end, mag, damped: damped_traj, mag_ratio, damped_ratio, damped_steady })
}

/// The toy problem of the second figure, read as the 1D Poisson problem
/// `u'' = f`, `f = 2 sin(2πx)`, zero boundary, `n` interior nodes.
pub fn poisson_toy<T: Real>(n: usize) -> (Matrix<T>, Vector<T>) {
    let h = 1.0 / (n as f64 + 1.0);
    let a = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            cr(T::of(-2.0))
        } else if i.abs_diff(j) == 1 {
            cr(T::one())
        } else {
            cr(T::zero())
        }
    });
    let b = Vector::from_fn(n, |i| {
        let x = (i as f64 + 1.0) * h;
        cr(T::of(h * h * 2.0 * (2.0 * std::f64::consts::PI * x).sin()))
    });
    (a, b)
}

/// One row of the second-figure comparison.
#[derive(Clone, Debug, Serialize)]
pub struct Fig2Row {
    pub delta: f64,
    pub t_mag: f64,
    pub t_damped: f64,
    pub mag_error: f64,
    pub damped_error: f64,
}

/// Each method's ODE runs from zero to its own predicted time: MAG to
/// `⌈κ̂ ln(1/δ)⌉`, damped to `ln(1/δ)/σ_min`. Bounds are `0.95 σ_min` and
/// `1.05 σ_max`, `γ = 2σ̂_min`. Errors are relative max-norm against the
/// direct solve.
pub fn run_fig2<T: Real>(n: usize, deltas: &[T]) -> Result<Vec<Fig2Row>, FlowError> {
    let (a, b) = poisson_toy::<T>(n);
    let exact = crate::numkit::direct_solve(&crate::numkit::LinearSystem::new(a.clone(), b.clone())?)?;
    let (smin, smax) = sigma_extremes(&a)?;
    let smin_hat = smin * T::of(0.95);
    let params = params_from_sigma(smin_hat, smax * T::of(1.05))?;
    let mag_sys = build_transformed(&a, &b, params)?;
    let mag_flow = build_mag_ode(&mag_sys);
    let damped = build_damped(&a, &b, T::of(2.0) * smin_hat)?;
    let mut rows = Vec::new();
    for &delta in deltas {
        let t_mag = T::of_usize(crate::mag::convergence_steps(params.kappa_hat, delta));
        let t_damped = evolution_time(FlowKind::Damped, smin, delta);
        let wm = mag_flow.state_at(&Vector::zeros(2 * n), t_mag)?;
        let wd = damped.state_at(&Vector::zeros(2 * n), t_damped)?;
        let um = mag_sys.solution_of(&wm);
        let ud = wd.slice(0, n);
        rows.push(Fig2Row {
            delta: delta.to_f64_lossy(),
            t_mag: t_mag.to_f64_lossy(),
            t_damped: t_damped.to_f64_lossy(),
            mag_error: um.rel_max_err(&exact).to_f64_lossy(),
            damped_error: ud.rel_max_err(&exact).to_f64_lossy(),
        });
    }
    Ok(rows)
}
