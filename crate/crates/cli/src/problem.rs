//! Problem sources and the solver settings derived from them.

use std::path::Path;

use schromag::baselines::{fig1_preset, poisson_toy};
use schromag::mag::derive_params;
use schromag::numkit::io::{parse_coo, parse_vector};
use schromag::numkit::sigma_extremes;
use schromag::pde::{preset, PdeProblem, SolverConfig};
use schromag::{CMatrix, CVector, MagParams};

use crate::config::{Merged, MethodArg};
use crate::CliError;

pub struct Problem {
    pub name: String,
    pub a: CMatrix,
    pub b: CVector,
    pub pde: Option<PdeProblem<f64>>,
    pub config: SolverConfig,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn load(m: &Merged) -> Result<Problem, CliError> {
    match (&m.preset, &m.matrix, &m.rhs) {
        (Some(name), None, None) => named(name),
        (None, Some(a), Some(b)) => {
            let a = parse_coo(&read(a)?).map_err(|e| CliError::Input(format!("{}: {e}", a.display())))?;
            let b = parse_vector(&read(b)?).map_err(|e| CliError::Input(format!("{}: {e}", b.display())))?;
            if !a.is_square() || a.rows() != b.len() {
                return Err(CliError::Input(format!("matrix is {}x{} but rhs has {} entries", a.rows(), a.cols(), b.len())));
            }
            Ok(Problem { name: "file".into(), a, b, pde: None, config: SolverConfig::default() })
        }
        (None, None, None) => Err(CliError::Input("no problem given: use --preset or --matrix with --rhs".into())),
        (Some(_), _, _) => Err(CliError::Input("--preset cannot be combined with --matrix/--rhs".into())),
        _ => Err(CliError::Input("--matrix and --rhs must be given together".into())),
    }
}

fn named(name: &str) -> Result<Problem, CliError> {
    match name {
        "fig1" => {
            let p = fig1_preset::<f64>();
            Ok(Problem { name: name.into(), a: p.a, b: p.b, pde: None, config: SolverConfig::default() })
        }
        "fig2" => {
            let (a, b) = poisson_toy::<f64>(16);
            Ok(Problem { name: name.into(), a, b, pde: None, config: SolverConfig::default() })
        }
        _ => {
            let p = preset::<f64>(name).map_err(|e| CliError::Input(e.to_string()))?;
            let sys = p.problem.assemble().map_err(|e| CliError::Input(e.to_string()))?;
            Ok(Problem { name: name.into(), a: sys.a, b: sys.b, pde: Some(p.problem), config: p.config })
        }
    }
}

/// Everything a solver run needs once flags, config file and preset are merged.
pub struct Settings {
    pub method: MethodArg,
    pub delta: f64,
    pub n_p: usize,
    pub params: MagParams,
    pub gamma: f64,
    pub gamma_f: Option<f64>,
}

pub fn settings(m: &Merged, p: &Problem) -> Result<Settings, CliError> {
    let delta = m.delta.unwrap_or(p.config.delta);
    let n_p = m.n_p.unwrap_or(p.config.n_p);
    let (l_hat, mu_hat) = match (m.l_hat, m.mu_hat) {
        (Some(l), Some(mu)) => (l, mu),
        (l, mu) => {
            let (lo, hi) = sigma_extremes(&p.a).map_err(|e| CliError::Numerical(e.to_string()))?;
            let hi = hi * p.config.upper;
            let lo = lo * p.config.lower;
            (l.unwrap_or(hi * hi), mu.unwrap_or(lo * lo))
        }
    };
    let mut params = derive_params(l_hat, mu_hat).map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(a) = m.alpha {
        if !(a > 0.0) {
            return Err(CliError::Input(format!("alpha must be positive, got {a}")));
        }
        params.alpha = a;
    }
    if let Some(b) = m.beta {
        if !(0.0..1.0).contains(&b) {
            return Err(CliError::Input(format!("beta must lie in [0, 1), got {b}")));
        }
        params.beta = b;
    }
    if let Some(g) = m.gamma_f {
        if !(g > 0.0) {
            return Err(CliError::Input(format!("gammaf must be positive, got {g}")));
        }
    }
    Ok(Settings {
        method: m.method.unwrap_or(MethodArg::Mag),
        delta,
        n_p,
        gamma: m.gamma.unwrap_or(2.0 * mu_hat.sqrt()),
        gamma_f: m.gamma_f,
        params,
    })
}
