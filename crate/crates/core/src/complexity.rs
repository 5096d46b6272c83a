//! Order-of-magnitude cost estimators with all suppressed constants set to 1.
//! Closed-form report arithmetic, so this module works in `f64` only.

use std::fmt::Write as _;

use serde::Serialize;

use crate::numkit::{norm2, sigma_extremes, Matrix, NumError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComplexityError {
    #[error("chi/delta = {0:.4} must exceed e for the ln ln factor")]
    Undefined(f64),
    #[error("input {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("missing spectrum bound: {0}")]
    MissingBound(&'static str),
    #[error(transparent)]
    Num(#[from] NumError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, ComplexityError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ComplexityError::NonPositive { name, value })
    }
}

/// `χ = s ‖H‖_max T`.
pub fn chi(s: f64, max_norm: f64, t: f64) -> f64 {
    s * max_norm * t
}

fn log_ratio(chi: f64, delta: f64) -> Result<f64, ComplexityError> {
    let r = chi / delta;
    if !(r > std::f64::consts::E) {
        return Err(ComplexityError::Undefined(r));
    }
    Ok(r.ln())
}

/// `χ ln(χ/δ) / ln ln(χ/δ)`.
pub fn queries(chi: f64, delta: f64) -> Result<f64, ComplexityError> {
    let l = log_ratio(chi, delta)?;
    Ok(chi * l / l.ln())
}

/// `χ [m_H + ln^{2.5}(χ/δ)] ln(χ/δ) / ln ln(χ/δ)` with `m_H = log₂ n + m`.
pub fn gates(chi: f64, delta: f64, n: usize, m: usize) -> Result<f64, ComplexityError> {
    let l = log_ratio(chi, delta)?;
    let m_h = (n.max(1) as f64).log2() + m as f64;
    Ok(chi * (m_h + l.powf(2.5)) * l / l.ln())
}

/// `ln δ⁻¹ ‖A‖² κ̂`.
pub fn repetitions(a_norm: f64, kappa_hat: f64, delta: f64) -> f64 {
    (1.0 / delta).ln() * a_norm * a_norm * kappa_hat
}

/// `Δp √(‖w₀‖² + T² ‖F‖₁²)`.
pub fn eta0(delta_p: f64, w0_norm: f64, t: f64, f_one_norm: f64) -> f64 {
    delta_p * (w0_norm * w0_norm + t * t * f_one_norm * f_one_norm).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mag,
    Gradient,
    Damped,
    HhlReference,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mag, Method::Gradient, Method::Damped, Method::HhlReference];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mag => "mag",
            Method::Gradient => "gradient",
            Method::Damped => "damped",
            Method::HhlReference => "hhl-reference",
        }
    }
}

/// How `‖D_ϑ‖_max` is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DNorm {
    /// `log₂ N_p`.
    LogNp,
    /// `N_p`, the growth of `max |ϑ_ℓ|` on a fixed-length domain.
    LinearNp,
}

impl DNorm {
    pub fn value(self, n_p: usize) -> f64 {
        match self {
            DNorm::LogNp => (n_p as f64).log2(),
            DNorm::LinearNp => n_p as f64,
        }
    }
}

/// Inputs the estimators need.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SystemSummary {
    pub n: usize,
    /// Row sparsity of `A`.
    pub s: usize,
    pub a_max_norm: f64,
    pub ata_max_norm: f64,
    pub a_norm2: f64,
    pub sigma_min: Option<f64>,
    pub kappa_hat: Option<f64>,
    pub delta: f64,
    pub n_p: usize,
}

impl SystemSummary {
    /// Summary with `σ_min` computed from `A`.
    pub fn from_matrix(a: &Matrix<f64>, kappa_hat: f64, delta: f64, n_p: usize) -> Result<Self, ComplexityError> {
        let (lo, _) = sigma_extremes(a)?;
        Ok(Self {
            n: a.rows(),
            s: a.sparsity(),
            a_max_norm: a.norm_max(),
            ata_max_norm: a.gram().norm_max(),
            a_norm2: norm2(a)?,
            sigma_min: Some(lo),
            kappa_hat: Some(kappa_hat),
            delta,
            n_p,
        })
    }

    /// `κ̂`, `κ_g = ‖A†A‖_max/σ_min²`, `κ_d = ‖A‖_max/σ_min`, and `κ̂` for the reference.
    pub fn kappa_like(&self, method: Method) -> Result<f64, ComplexityError> {
        let smin = || self.sigma_min.ok_or(ComplexityError::MissingBound("sigma_min"));
        match method {
            Method::Mag | Method::HhlReference => self.kappa_hat.ok_or(ComplexityError::MissingBound("kappa_hat")),
            Method::Gradient => Ok(self.ata_max_norm / smin()?.powi(2)),
            Method::Damped => Ok(self.a_max_norm / smin()?),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReportInputs {
    pub s: usize,
    pub max_norm: f64,
    pub t_evolve: f64,
    pub delta: f64,
    pub n_p: usize,
    pub kappa_like: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityReport {
    pub method: Method,
    pub chi: f64,
    pub queries: f64,
    pub gates: f64,
    pub repetitions: f64,
    /// Headline estimate under the selected `‖D_ϑ‖` reading.
    pub estimate: f64,
    pub estimate_log_np: f64,
    pub estimate_linear_np: f64,
    pub d_norm: DNorm,
    /// `ln κ` was replaced by `ln(κ + 1)` because `κ = 1`.
    pub degenerate_log: bool,
    pub inputs: ReportInputs,
}

/// `ln δ⁻¹ · D · s² · κ · ln κ` for the Schrödingerized flows; the reference
/// row is the textbook `ln δ⁻¹ · s · κ`.
pub fn method_complexity(method: Method, sys: &SystemSummary, d_norm: DNorm) -> Result<ComplexityReport, ComplexityError> {
    let delta = positive("delta", sys.delta)?;
    if !(delta < 1.0) {
        return Err(ComplexityError::NonPositive { name: "1 - delta", value: 1.0 - delta });
    }
    let kappa = positive("kappa", sys.kappa_like(method)?)?;
    let ld = (1.0 / delta).ln();
    let s = sys.s.max(1) as f64;
    let degenerate_log = kappa <= 1.0;
    let lk = if degenerate_log { (kappa + 1.0).ln() } else { kappa.ln() };
    let shape = |d: f64| match method {
        Method::HhlReference => ld * s * kappa,
        _ => ld * d * s * s * kappa * lk,
    };
    let (est_log, est_lin) = (shape(DNorm::LogNp.value(sys.n_p)), shape(DNorm::LinearNp.value(sys.n_p)));
    let max_norm = match method {
        Method::HhlReference => sys.a_max_norm,
        _ => d_norm.value(sys.n_p),
    };
    let s_h = match method {
        Method::HhlReference => s,
        _ => s * s,
    };
    let t_evolve = kappa * ld;
    let x = chi(s_h, max_norm, t_evolve);
    let q = queries(x, delta)?;
    let g = gates(x, delta, sys.n, 0)?;
    let kappa_hat = sys.kappa_hat.unwrap_or(kappa);
    Ok(ComplexityReport {
        method,
        chi: x,
        queries: q,
        gates: g,
        repetitions: repetitions(sys.a_norm2, kappa_hat, delta),
        estimate: match d_norm {
            DNorm::LogNp => est_log,
            DNorm::LinearNp => est_lin,
        },
        estimate_log_np: est_log,
        estimate_linear_np: est_lin,
        d_norm,
        degenerate_log,
        inputs: ReportInputs { s: s_h as usize, max_norm, t_evolve, delta, n_p: sys.n_p, kappa_like: kappa, n: sys.n },
    })
}

/// CSV `method, kappa_like, chi, queries, gates, repetitions`.
pub fn comparison_csv(reports: &[ComplexityReport]) -> String {
    let mut s = String::from("method,kappa_like,chi,queries,gates,repetitions\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.method.name(),
            r.inputs.kappa_like,
            r.chi,
            r.queries,
            r.gates,
            r.repetitions
        );
    }
    s
}
