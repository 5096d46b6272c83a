//! Flag, config-file and preset merging. Flags win over the config file,
//! which wins over preset defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Mag,
    Gradient,
    Damped,
    Schro,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::Mag => "mag",
            MethodArg::Gradient => "gradient",
            MethodArg::Damped => "damped",
            MethodArg::Schro => "schro",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Named problem: fig1, fig2, or a PDE preset such as fig3a.
    #[arg(long)]
    pub preset: Option<String>,
    /// Matrix in coordinate text format.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Right-hand side, one `re im` pair per line.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Minimum number of grid points in p (power of two).
    #[arg(long)]
    pub np: Option<usize>,
    /// MAG step size override.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// MAG momentum override.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Damping of the second-order flow.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Homogenization constant for the Schrodingerized system.
    #[arg(long)]
    pub gammaf: Option<f64>,
    /// Upper bound on the eigenvalues of A†A.
    #[arg(long)]
    pub lhat: Option<f64>,
    /// Lower bound on the eigenvalues of A†A.
    #[arg(long)]
    pub muhat: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the fields above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_f: Option<f64>,
    pub l_hat: Option<f64>,
    pub mu_hat: Option<f64>,
}

/// Config-file mirror of the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub matrix: Option<PathBuf>,
    pub rhs: Option<PathBuf>,
    pub method: Option<MethodArg>,
    pub delta: Option<f64>,
    pub n_p: Option<usize>,
    #[serde(default)]
    pub overrides: Overrides,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed config {}: {e}", path.display())))
    }
}

/// Merged settings with preset defaults still unresolved (`None`).
#[derive(Debug, Default)]
pub struct Merged {
    pub preset: Option<String>,
    pub matrix: Option<PathBuf>,
    pub rhs: Option<PathBuf>,
    pub method: Option<MethodArg>,
    pub delta: Option<f64>,
    pub n_p: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_f: Option<f64>,
    pub l_hat: Option<f64>,
    pub mu_hat: Option<f64>,
    pub out: PathBuf,
    pub seed: u64,
    pub format: Format,
}

pub fn merge(args: &CommonArgs) -> Result<Merged, CliError> {
    let file = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let o = file.overrides;
    let m = Merged {
        preset: args.preset.clone().or(file.preset),
        matrix: args.matrix.clone().or(file.matrix),
        rhs: args.rhs.clone().or(file.rhs),
        method: args.method.or(file.method),
        delta: args.delta.or(file.delta),
        n_p: args.np.or(file.n_p),
        alpha: args.alpha.or(o.alpha),
        beta: args.beta.or(o.beta),
        gamma: args.gamma.or(o.gamma),
        gamma_f: args.gammaf.or(o.gamma_f),
        l_hat: args.lhat.or(o.l_hat),
        mu_hat: args.muhat.or(o.mu_hat),
        out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("schromag-out")),
        seed: args.seed.or(file.seed).unwrap_or(0),
        format: args.format.or(file.format).unwrap_or(Format::Csv),
    };
    if let Some(d) = m.delta {
        if !(d > 0.0 && d < 1.0) {
            return Err(CliError::Input(format!("delta must lie in (0, 1), got {d}")));
        }
    }
    if let Some(n) = m.n_p {
        if n < 8 || !n.is_power_of_two() {
            return Err(CliError::Input(format!("np must be a power of two >= 8, got {n}")));
        }
    }
    Ok(m)
}
