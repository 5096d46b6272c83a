use serde::Serialize;

use super::{p_threshold, SchroError};
use crate::numkit::Matrix;
use crate::scalar::Real;

/// Uniform periodic grid `p_k = p_left + kΔp`, `k = 0..n_p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PGrid<T: Real> {
    pub p_left: T,
    pub p_right: T,
    pub n_p: usize,
}

impl<T: Real> PGrid<T> {
    pub fn new(p_left: T, p_right: T, n_p: usize) -> Result<Self, SchroError> {
        if !(p_left < T::zero() && p_right > T::zero()) {
            return Err(SchroError::Grid(format!("need p_left < 0 < p_right, got [{p_left}, {p_right}]")));
        }
        if n_p < 8 || !n_p.is_power_of_two() {
            return Err(SchroError::Grid(format!("n_p must be a power of two >= 8, got {n_p}")));
        }
        Ok(Self { p_left, p_right, n_p })
    }

    pub fn length(&self) -> T {
        self.p_right - self.p_left
    }

    pub fn dp(&self) -> T {
        self.length() / T::of_usize(self.n_p)
    }

    pub fn point(&self, k: usize) -> T {
        self.p_left + T::of_usize(k) * self.dp()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n_p).map(|k| self.point(k)).collect()
    }

    /// Signed frequency index of FFT bin `j`.
    pub fn ell(&self, j: usize) -> i64 {
        if j < self.n_p / 2 {
            j as i64
        } else {
            j as i64 - self.n_p as i64
        }
    }

    /// `ϑ_ℓ = 2πℓ/(p_right − p_left)` for FFT bin `j`.
    pub fn theta_bin(&self, j: usize) -> T {
        T::of(2.0 * std::f64::consts::PI * self.ell(j) as f64) / self.length()
    }

    /// `ϑ_ℓ` for `ℓ = −n_p/2 … n_p/2 − 1` in increasing order.
    pub fn thetas(&self) -> Vec<T> {
        let half = self.n_p as i64 / 2;
        (-half..half).map(|l| T::of(2.0 * std::f64::consts::PI * l as f64) / self.length()).collect()
    }

    pub fn theta_max(&self) -> T {
        T::of(std::f64::consts::PI * self.n_p as f64) / self.length()
    }
}

/// Grid on `[ln tail_tol, p◇ + 2]` with `p◇ = p_threshold(h1, t_end)`.
pub fn build_grid<T: Real>(h1: &Matrix<T>, t_end: T, n_p: usize, tail_tol: T) -> Result<PGrid<T>, SchroError> {
    if !(tail_tol > T::zero() && tail_tol < T::one()) {
        return Err(SchroError::Grid(format!("tail tolerance must lie in (0,1), got {tail_tol}")));
    }
    let p_diamond = p_threshold(h1, t_end)?;
    let grid = PGrid::new(tail_tol.ln(), p_diamond + T::of(2.0), n_p)?;
    if grid.dp() > T::of(0.5) {
        return Err(SchroError::Grid(format!(
            "n_p = {n_p} gives dp = {:.4} > 0.5 on [{:.3}, {:.3}]; increase n_p",
            grid.dp(),
            grid.p_left,
            grid.p_right
        )));
    }
    Ok(grid)
}

/// Rules for a grid wide enough for the whole transport over `[0, t]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransportGridSpec<T: Real> {
    /// `e^{p_left}` bound before transport.
    pub tail_tol: T,
    /// Distance kept to the right of `p◇`.
    pub right_extent: T,
    /// Largest accepted spacing; `n_p` is doubled until met.
    pub max_dp: T,
}

impl<T: Real> Default for TransportGridSpec<T> {
    fn default() -> Self {
        Self { tail_tol: T::of(1e-10), right_extent: T::of(10.0), max_dp: T::of(0.1) }
    }
}

/// Grid for `h1` with spectrum in `[lambda_min, lambda_max]` evolved to `t`:
/// the left edge is moved by the leftward travel `|λ_min| t` so the periodic
/// wrap never reaches the recovery window, and `n_p` is raised to meet `max_dp`.
pub fn transport_grid<T: Real>(
    lambda_min: T,
    lambda_max: T,
    t: T,
    n_p_min: usize,
    spec: &TransportGridSpec<T>,
) -> Result<PGrid<T>, SchroError> {
    let travel = (-lambda_min).max(T::zero()) * t;
    let p_left = spec.tail_tol.ln() - travel;
    let p_right = super::p_threshold_from(lambda_max, t) + spec.right_extent;
    let length = p_right - p_left;
    let needed = (length / spec.max_dp).ceil().to_f64_lossy() as usize;
    let n_p = n_p_min.max(needed.max(8).next_power_of_two());
    PGrid::new(p_left, p_right, n_p)
}
