//! Schrödingerization of the MAG ODE: homogenization, Hermitian split, warped
//! phase transform, Fourier discretization in `p`, unitary per-mode evolution
//! and recovery of the original variables.

mod grid;
mod pipeline;

pub use grid::{build_grid, transport_grid, PGrid, TransportGridSpec};
pub use pipeline::{pipeline, pipeline_dense, pipeline_with, PipelineOptions, PipelineOutput, PipelineReport};

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::mag::TransformedSystem;
use crate::numkit::{eigh, Matrix, NumError, Vector};
use crate::scalar::{c, cr, Real, C};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchroError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("no grid point beyond p_diamond + margin = {needed:.4} (p_right = {p_right:.4}); enlarge p_right")]
    NoAdmissiblePoint { needed: f64, p_right: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Mag(#[from] crate::mag::MagError),
}

/// `(H − I, F)`: the continuous form `dw/dt = (H − I) w + F` of the iteration.
pub fn to_ode<T: Real>(sys: &TransformedSystem<T>) -> (Matrix<T>, Vector<T>) {
    let g = &sys.h - &Matrix::identity(2 * sys.n);
    (g, sys.f.clone())
}

/// `[[G, γ_F I], [0, 0]]` acting on `[w; F/γ_F]`.
#[derive(Clone, Debug)]
pub struct HomogenizedSystem<T: Real> {
    pub h_homo: Matrix<T>,
    pub gamma_f: T,
    pub w0_homo: Vector<T>,
    /// Dimension of the original ODE state.
    pub m: usize,
}

/// Default forcing scale `0.1 · min{α μ̂, 1 − β}`.
pub fn default_gamma_f<T: Real>(p: &crate::mag::MagParams<T>) -> T {
    T::of(0.1) * p.margin()
}

pub fn homogenize<T: Real>(
    generator: &Matrix<T>,
    drive: &Vector<T>,
    w0: &Vector<T>,
    gamma_f: T,
) -> Result<HomogenizedSystem<T>, SchroError> {
    if !(gamma_f > T::zero()) {
        return Err(SchroError::Invalid(format!("gamma_f must be positive, got {gamma_f}")));
    }
    let m = generator.rows();
    if !generator.is_square() || drive.len() != m || w0.len() != m {
        return Err(SchroError::Invalid(format!(
            "generator {}x{}, drive {}, w0 {}",
            generator.rows(),
            generator.cols(),
            drive.len(),
            w0.len()
        )));
    }
    let mut h = Matrix::zeros(2 * m, 2 * m);
    h.set_submatrix(0, 0, generator);
    for i in 0..m {
        h[(i, m + i)] = cr(gamma_f);
    }
    let w0_homo = w0.concat(&drive.scale_real(T::one() / gamma_f));
    Ok(HomogenizedSystem { h_homo: h, gamma_f, w0_homo, m })
}

/// `h_homo = h1 + i h2` with both parts Hermitian.
#[derive(Clone, Debug)]
pub struct HermitianSplit<T: Real> {
    pub h1: Matrix<T>,
    pub h2: Matrix<T>,
}

impl<T: Real> HermitianSplit<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        &self.h1 + &self.h2.scale(c(T::zero(), T::one()))
    }

    pub fn dim(&self) -> usize {
        self.h1.rows()
    }
}

/// `h1 = (M + M†)/2`, `h2 = (M − M†)/(2i)`.
pub fn split_matrix<T: Real>(m: &Matrix<T>) -> HermitianSplit<T> {
    let ma = m.adjoint();
    let half = T::of(0.5);
    let h1 = (m + &ma).scale_real(half);
    let h2 = (m - &ma).scale(c(T::zero(), -half));
    HermitianSplit { h1, h2 }
}

pub fn split<T: Real>(hs: &HomogenizedSystem<T>) -> HermitianSplit<T> {
    split_matrix(&hs.h_homo)
}

/// `p◇ = max{λ_max(h1)·t, 0}`.
pub fn p_threshold<T: Real>(h1: &Matrix<T>, t: T) -> Result<T, SchroError> {
    if t < T::zero() {
        return Err(SchroError::Invalid(format!("time must be non-negative, got {t}")));
    }
    Ok(p_threshold_from(eigh(h1)?.max(), t))
}

pub fn p_threshold_from<T: Real>(lambda_max: T, t: T) -> T {
    (lambda_max * t).max(T::zero())
}

/// Fourier-space state at time `time`; `modes[j]` is the FFT bin `j`.
#[derive(Clone, Debug)]
pub struct SchrodState<T: Real> {
    pub grid: PGrid<T>,
    pub modes: Vec<Vector<T>>,
    pub time: T,
}

pub(crate) struct FftPair<T: Real> {
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    n: usize,
}

impl<T: Real> FftPair<T> {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), n }
    }

    pub(crate) fn forward(&self, buf: &mut [C<T>]) {
        self.fwd.process(buf);
    }

    /// Normalized inverse.
    pub(crate) fn inverse(&self, buf: &mut [C<T>]) {
        self.inv.process(buf);
        let s = T::one() / T::of_usize(self.n);
        for z in buf.iter_mut() {
            *z = *z * s;
        }
    }
}

impl<T: Real> SchrodState<T> {
    /// Euclidean norm of the Fourier coefficients.
    pub fn fourier_norm(&self) -> T {
        self.modes.iter().map(|v| v.norm2() * v.norm2()).sum::<T>().sqrt()
    }

    pub fn dim(&self) -> usize {
        self.modes.first().map_or(0, Vector::len)
    }

    /// Physical-space field `w_warp(t, p_k)` for every grid point.
    pub fn warped(&self) -> Vec<Vector<T>> {
        let n = self.grid.n_p;
        let d = self.dim();
        let fft = FftPair::new(n);
        let mut out = vec![Vector::zeros(d); n];
        let mut buf = vec![cr(T::zero()); n];
        for comp in 0..d {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = self.modes[j][comp];
            }
            fft.inverse(&mut buf);
            for (k, v) in out.iter_mut().enumerate() {
                v[comp] = buf[k];
            }
        }
        out
    }
}

/// Warped initial data `e^{−|p_k|} w0` in Fourier space.
pub fn warp_initial<T: Real>(grid: &PGrid<T>, w0_homo: &Vector<T>) -> SchrodState<T> {
    let n = grid.n_p;
    let d = w0_homo.len();
    let fft = FftPair::new(n);
    let mut buf: Vec<C<T>> = (0..n).map(|k| cr((-grid.point(k).abs()).exp())).collect();
    fft.forward(&mut buf);
    let modes = buf.iter().map(|&phi| w0_homo.scale(phi)).collect();
    let _ = d;
    SchrodState { grid: grid.clone(), modes, time: T::zero() }
}

/// Evolves each Fourier mode by `e^{−i(ϑ_ℓ h1 − h2) t}`, the Fourier form of
/// `∂_t w = −h1 ∂_p w + i h2 w`.
pub fn evolve<T: Real>(
    hs: &HermitianSplit<T>,
    grid: &PGrid<T>,
    w0_homo: &Vector<T>,
    t: T,
) -> Result<SchrodState<T>, SchroError> {
    if hs.dim() != w0_homo.len() {
        return Err(SchroError::Invalid(format!("split has dimension {}, state {}", hs.dim(), w0_homo.len())));
    }
    if !(t >= T::zero()) {
        return Err(SchroError::Invalid(format!("time must be non-negative, got {t}")));
    }
    let mut state = warp_initial(grid, w0_homo);
    if t == T::zero() {
        return Ok(state);
    }
    for j in 0..grid.n_p {
        let theta = grid.theta_bin(j);
        let hk = &hs.h1.scale_real(theta) - &hs.h2;
        let ev = eigh(&hk)?;
        let x = &state.modes[j];
        let y = ev.vectors.adjoint_matvec(x)?;
        let y: Vector<T> = y
            .iter()
            .zip(&ev.values)
            .map(|(z, &l)| {
                let ph = -l * t;
                *z * C::new(ph.cos(), ph.sin())
            })
            .collect();
        state.modes[j] = ev.vectors.matvec(&y)?;
    }
    state.time = t;
    Ok(state)
}

/// Recovered state-block value and where it was read.
#[derive(Clone, Debug, Serialize)]
pub struct Recovery<T: Real> {
    pub value: Vector<T>,
    pub k_star: usize,
    pub p_star: T,
    pub p_diamond: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryMethod {
    SinglePoint,
    Integral,
}

impl RecoveryMethod {
    pub fn name(self) -> &'static str {
        match self {
            RecoveryMethod::SinglePoint => "single-point",
            RecoveryMethod::Integral => "integral",
        }
    }
}

/// Smallest index with `p_k > p◇ + Δp`.
pub fn admissible_index<T: Real>(grid: &PGrid<T>, p_diamond: T) -> Result<usize, SchroError> {
    let needed = p_diamond + grid.dp();
    (0..grid.n_p).find(|&k| grid.point(k) > needed).ok_or(SchroError::NoAdmissiblePoint {
        needed: needed.to_f64_lossy(),
        p_right: grid.p_right.to_f64_lossy(),
    })
}

fn top_block<T: Real>(v: &Vector<T>) -> Vector<T> {
    v.slice(0, v.len() / 2)
}

/// `e^{p_k} w_warp(t, p_k)` at a given index, top block only.
pub fn recover_at<T: Real>(warped: &[Vector<T>], grid: &PGrid<T>, k: usize) -> Vector<T> {
    top_block(&warped[k].scale_real(grid.point(k).exp()))
}

/// Single-point recovery at the first admissible grid point.
pub fn recover_single_point<T: Real>(state: &SchrodState<T>, h1: &Matrix<T>) -> Result<Recovery<T>, SchroError> {
    let p_diamond = p_threshold(h1, state.time)?;
    let k = admissible_index(&state.grid, p_diamond)?;
    let warped = state.warped();
    Ok(Recovery { value: recover_at(&warped, &state.grid, k), k_star: k, p_star: state.grid.point(k), p_diamond })
}

/// Trapezoid weights of `∫_{p_k*}^{p_last}` on the uniform grid.
pub(crate) fn trapezoid_weights<T: Real>(count: usize, dp: T) -> impl Iterator<Item = T> {
    let half = T::of(0.5);
    (0..count).map(move |i| if i == 0 || i + 1 == count { dp * half } else { dp })
}

/// `∫ w_warp dq / ∫ e^{−q} dq` over `[p_k*, p_last]`, both by the same
/// trapezoid rule, so the pure `e^{−q}` profile is recovered exactly.
pub fn integral_recover_from<T: Real>(warped: &[Vector<T>], grid: &PGrid<T>, k_star: usize) -> Vector<T> {
    let count = grid.n_p - k_star;
    let d = warped[0].len();
    let mut acc = Vector::zeros(d);
    let mut norm = T::zero();
    for (i, wgt) in trapezoid_weights(count, grid.dp()).enumerate() {
        let k = k_star + i;
        acc.axpy(cr(wgt), &warped[k]);
        norm += wgt * (-grid.point(k)).exp();
    }
    if count == 1 {
        // a single node: fall back to the point value
        return recover_at(warped, grid, k_star);
    }
    top_block(&acc.scale_real(T::one() / norm))
}

/// Integral recovery starting at the first admissible grid point.
pub fn recover_integral<T: Real>(state: &SchrodState<T>, h1: &Matrix<T>) -> Result<Recovery<T>, SchroError> {
    let p_diamond = p_threshold(h1, state.time)?;
    let k = admissible_index(&state.grid, p_diamond)?;
    let warped = state.warped();
    Ok(Recovery { value: integral_recover_from(&warped, &state.grid, k), k_star: k, p_star: state.grid.point(k), p_diamond })
}
