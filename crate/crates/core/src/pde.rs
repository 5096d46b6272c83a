//! Finite-difference test problems: 1D/2D Helmholtz and 1D/2D biharmonic on
//! `[0, 1]^d`, with `n` interior unknowns per dimension and `h = 1/(n+1)`.
//! 2D unknowns are stored with the x-index fastest.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::mag::{params_from_sigma, MagParams};
use crate::numkit::{direct_solve, kron, sigma_extremes, LinearSystem, Matrix, NumError, Vector};
use crate::scalar::{c, cr, Real, C};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("n must be at least 3, got {0}")]
    TooSmall(usize),
    #[error("boundary {boundary} is not available for {family}")]
    InvalidBoundary { family: &'static str, boundary: String },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("forcing has {got} samples, expected {expected}")]
    ForcingLength { got: usize, expected: usize },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Mag(#[from] crate::mag::MagError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Helmholtz1d,
    Helmholtz2d,
    Biharmonic1d,
    Biharmonic2d,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Helmholtz1d => "helmholtz1d",
            Family::Helmholtz2d => "helmholtz2d",
            Family::Biharmonic1d => "biharmonic1d",
            Family::Biharmonic2d => "biharmonic2d",
        }
    }

    pub fn dims(self) -> usize {
        match self {
            Family::Helmholtz1d | Family::Biharmonic1d => 1,
            Family::Helmholtz2d | Family::Biharmonic2d => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary<T: Real> {
    /// Homogeneous Dirichlet (and `v = 0` for biharmonic).
    Zero,
    /// `u' = c u` at `x = 0` (and `y = 0` in 2D); Helmholtz only.
    Robin(C<T>),
    /// `u'' = value` at `x = 0`; biharmonic only.
    Mixed(T),
}

impl<T: Real> Boundary<T> {
    pub fn describe(&self) -> String {
        match self {
            Boundary::Zero => "zero".into(),
            Boundary::Robin(c) => format!("robin({}{:+}i)", c.re, c.im),
            Boundary::Mixed(v) => format!("mixed(u''(0)={v})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Forcing<T: Real> {
    /// `2 sin(2πs) + 3 sin(3πs)` with `s = x` or `x + y`.
    SineMix,
    /// `2 cos(2πs)` with `s = x` or `x + y`.
    Cosine,
    /// Values at the interior nodes in storage order.
    Samples(Vec<C<T>>),
}

impl<T: Real> Forcing<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Forcing::SineMix => "2sin(2pi s)+3sin(3pi s)",
            Forcing::Cosine => "2cos(2pi s)",
            Forcing::Samples(_) => "samples",
        }
    }

    fn eval(&self, s: f64) -> C<T> {
        match self {
            Forcing::SineMix => cr(T::of(2.0 * (2.0 * PI * s).sin() + 3.0 * (3.0 * PI * s).sin())),
            Forcing::Cosine => cr(T::of(2.0 * (2.0 * PI * s).cos())),
            Forcing::Samples(_) => unreachable!("samples are not evaluated pointwise"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeProblem<T: Real> {
    pub family: Family,
    pub n: usize,
    pub k: T,
    pub boundary: Boundary<T>,
    pub forcing: Forcing<T>,
}

/// `tridiag(1, −2, 1)` of size `n`.
pub fn second_difference<T: Real>(n: usize) -> Matrix<T> {
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            cr(T::of(-2.0))
        } else if i.abs_diff(j) == 1 {
            cr(T::one())
        } else {
            cr(T::zero())
        }
    })
}

/// `[[−(1+2hc), e₁ᵀ], [e₁, L_h]]` on the nodes `x_0 … x_n`.
pub fn robin_difference<T: Real>(n: usize, h: T, coef: C<T>) -> Matrix<T> {
    let mut m = Matrix::zeros(n + 1, n + 1);
    m.set_submatrix(1, 1, &second_difference(n));
    m[(0, 0)] = -(cr(T::one()) + coef * (T::of(2.0) * h));
    m[(0, 1)] = cr(T::one());
    m[(1, 0)] = cr(T::one());
    m
}

/// `I ⊗ L + L ⊗ I`.
pub fn laplacian_2d<T: Real>(l: &Matrix<T>) -> Matrix<T> {
    let id = Matrix::identity(l.rows());
    &kron(&id, l) + &kron(l, &id)
}

fn check_n(n: usize) -> Result<(), PdeError> {
    if n < 3 {
        Err(PdeError::TooSmall(n))
    } else {
        Ok(())
    }
}

impl<T: Real> PdeProblem<T> {
    pub fn h(&self) -> T {
        T::one() / T::of_usize(self.n + 1)
    }

    /// Nodes per dimension in the unknown vector.
    fn nodes_1d(&self) -> usize {
        match self.boundary {
            Boundary::Robin(_) => self.n + 1,
            _ => self.n,
        }
    }

    /// Index of the first node along each axis (0 includes the boundary node).
    fn first_node(&self) -> usize {
        match self.boundary {
            Boundary::Robin(_) => 0,
            _ => 1,
        }
    }

    /// Dimension of the assembled system.
    pub fn dim(&self) -> usize {
        let m = self.nodes_1d();
        match self.family {
            Family::Helmholtz1d => m,
            Family::Helmholtz2d => m * m,
            Family::Biharmonic1d => 2 * m,
            Family::Biharmonic2d => 2 * m * m,
        }
    }

    /// Grid coordinates of the solution unknowns, in storage order.
    pub fn coordinates(&self) -> Vec<(f64, Option<f64>)> {
        let h = 1.0 / (self.n as f64 + 1.0);
        let m = self.nodes_1d();
        let x0 = self.first_node();
        match self.family.dims() {
            1 => (0..m).map(|i| ((i + x0) as f64 * h, None)).collect(),
            _ => (0..m * m).map(|idx| (((idx % m) + x0) as f64 * h, Some(((idx / m) + x0) as f64 * h))).collect(),
        }
    }

    /// `h²f` on the solution nodes, zero on Robin boundary rows.
    fn scaled_forcing(&self) -> Result<Vector<T>, PdeError> {
        let h = self.h();
        let h2 = h * h;
        let m = self.nodes_1d();
        let count = if self.family.dims() == 1 { m } else { m * m };
        if let Forcing::Samples(v) = &self.forcing {
            if v.len() != count {
                return Err(PdeError::ForcingLength { got: v.len(), expected: count });
            }
            return Ok(Vector::from_vec(v.iter().map(|z| *z * h2).collect()));
        }
        let robin = matches!(self.boundary, Boundary::Robin(_));
        let coords = self.coordinates();
        Ok(Vector::from_fn(count, |idx| {
            let (x, y) = coords[idx];
            let on_edge = robin && (x == 0.0 || y == Some(0.0));
            if on_edge {
                cr(T::zero())
            } else {
                self.forcing.eval(x + y.unwrap_or(0.0)) * h2
            }
        }))
    }

    pub fn assemble(&self) -> Result<LinearSystem<T>, PdeError> {
        check_n(self.n)?;
        let n = self.n;
        let h = self.h();
        let kh2 = self.k * self.k * h * h;
        let invalid = || PdeError::InvalidBoundary { family: self.family.name(), boundary: self.boundary.describe() };
        let f = self.scaled_forcing()?;
        let sys = match (self.family, self.boundary) {
            (Family::Helmholtz1d, Boundary::Zero) => {
                let a = &second_difference(n) + &Matrix::identity(n).scale_real(kh2);
                LinearSystem::new(a, f)?
            }
            (Family::Helmholtz1d, Boundary::Robin(coef)) => {
                let mut a = robin_difference(n, h, coef);
                for i in 1..=n {
                    a[(i, i)] += cr(kh2);
                }
                LinearSystem::new(a, f)?
            }
            (Family::Helmholtz2d, Boundary::Zero) => {
                let a = &laplacian_2d(&second_difference(n)) + &Matrix::identity(n * n).scale_real(kh2);
                LinearSystem::new(a, f)?
            }
            (Family::Helmholtz2d, Boundary::Robin(coef)) => {
                let m = n + 1;
                let a = &laplacian_2d(&robin_difference(n, h, coef)) + &Matrix::identity(m * m).scale_real(kh2);
                LinearSystem::new(a, f)?
            }
            (Family::Biharmonic1d, Boundary::Zero | Boundary::Mixed(_)) => {
                let l = second_difference(n);
                let a = biharmonic_blocks(&l, h);
                let mut b = Vector::zeros(n).concat(&f);
                if let Boundary::Mixed(v) = self.boundary {
                    b[n] -= cr(v);
                }
                LinearSystem::new(a, b)?
            }
            (Family::Biharmonic2d, Boundary::Zero | Boundary::Mixed(_)) => {
                let l = laplacian_2d(&second_difference(n));
                let a = biharmonic_blocks(&l, h);
                let nn = n * n;
                let mut b = Vector::zeros(nn).concat(&f);
                if let Boundary::Mixed(v) = self.boundary {
                    // v-rows next to the x = 0 edge
                    for j in 0..n {
                        b[nn + j * n] -= cr(v);
                    }
                }
                LinearSystem::new(a, b)?
            }
            _ => return Err(invalid()),
        };
        Ok(sys)
    }

    /// Entries of the solution vector that hold `u` (biharmonic systems also carry `v`).
    pub fn u_part(&self, w: &Vector<T>) -> Vector<T> {
        match self.family {
            Family::Biharmonic1d | Family::Biharmonic2d => w.slice(0, w.len() / 2),
            _ => w.clone(),
        }
    }

    pub fn metadata(&self) -> ProblemMeta {
        ProblemMeta {
            family: self.family.name(),
            n: self.n,
            k: self.k.to_f64_lossy(),
            boundary: self.boundary.describe(),
            forcing: self.forcing.name(),
            h: self.h().to_f64_lossy(),
        }
    }

    /// CSV `node_index, x, [y,] u_re, u_im` for the `u` entries of `w`.
    pub fn solution_csv(&self, w: &Vector<T>) -> String {
        let u = self.u_part(w);
        let coords = self.coordinates();
        let two_d = self.family.dims() == 2;
        let mut s = String::from(if two_d { "node_index,x,y,u_re,u_im\n" } else { "node_index,x,u_re,u_im\n" });
        for (i, (z, (x, y))) in u.iter().zip(coords).enumerate() {
            let (re, im) = (z.re.to_f64_lossy(), z.im.to_f64_lossy());
            let _ = match y {
                Some(y) => writeln!(s, "{i},{x},{y},{re:e},{im:e}"),
                None => writeln!(s, "{i},{x},{re:e},{im:e}"),
            };
        }
        s
    }
}

/// `[[L, −h²I], [0, L]]`.
fn biharmonic_blocks<T: Real>(l: &Matrix<T>, h: T) -> Matrix<T> {
    let m = l.rows();
    let coupling = Matrix::identity(m).scale_real(-h * h);
    Matrix::from_blocks(&[vec![Some(l), Some(&coupling)], vec![None, Some(l)]]).expect("square blocks")
}

/// JSON sidecar for exported problems.
#[derive(Clone, Debug, Serialize)]
pub struct ProblemMeta {
    pub family: &'static str,
    pub n: usize,
    pub k: f64,
    pub boundary: String,
    pub forcing: &'static str,
    pub h: f64,
}

pub fn helmholtz_1d<T: Real>(n: usize, k: T, forcing: Forcing<T>, boundary: Boundary<T>) -> Result<LinearSystem<T>, PdeError> {
    PdeProblem { family: Family::Helmholtz1d, n, k, boundary, forcing }.assemble()
}

pub fn helmholtz_2d<T: Real>(n: usize, k: T, forcing: Forcing<T>, boundary: Boundary<T>) -> Result<LinearSystem<T>, PdeError> {
    PdeProblem { family: Family::Helmholtz2d, n, k, boundary, forcing }.assemble()
}

pub fn biharmonic_1d<T: Real>(n: usize, forcing: Forcing<T>, boundary: Boundary<T>) -> Result<LinearSystem<T>, PdeError> {
    PdeProblem { family: Family::Biharmonic1d, n, k: T::zero(), boundary, forcing }.assemble()
}

pub fn biharmonic_2d<T: Real>(n: usize, forcing: Forcing<T>, boundary: Boundary<T>) -> Result<LinearSystem<T>, PdeError> {
    PdeProblem { family: Family::Biharmonic2d, n, k: T::zero(), boundary, forcing }.assemble()
}

/// Discrete sine transform solve of `(L_h + k²h²I) u = b` (1D, zero boundary).
pub fn sine_mode_solve_1d<T: Real>(n: usize, k: T, b: &Vector<T>) -> Vector<T> {
    let h = 1.0 / (n as f64 + 1.0);
    let kh2 = (k * k).to_f64_lossy() * h * h;
    let s = |j: usize, i: usize| T::of((((j + 1) * (i + 1)) as f64 * PI * h).sin());
    let norm = T::of((n as f64 + 1.0) / 2.0);
    let mut u = Vector::zeros(n);
    for j in 0..n {
        let lam = T::of(-4.0 * ((j + 1) as f64 * PI * h / 2.0).sin().powi(2) + kh2);
        let coef: C<T> = (0..n).map(|i| b[i] * s(j, i)).fold(cr(T::zero()), |a, z| a + z) / (norm * lam);
        for i in 0..n {
            u[i] += coef * s(j, i);
        }
    }
    u
}

/// 2D analogue of [`sine_mode_solve_1d`] for `I⊗L + L⊗I + k²h²I`.
pub fn sine_mode_solve_2d<T: Real>(n: usize, k: T, b: &Vector<T>) -> Vector<T> {
    let h = 1.0 / (n as f64 + 1.0);
    let kh2 = (k * k).to_f64_lossy() * h * h;
    let sv: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| (((j + 1) * (i + 1)) as f64 * PI * h).sin()).collect()).collect();
    let lam: Vec<f64> = (0..n).map(|j| -4.0 * ((j + 1) as f64 * PI * h / 2.0).sin().powi(2)).collect();
    let norm = ((n as f64 + 1.0) / 2.0).powi(2);
    // forward transform along x then y
    let mut coef = vec![cr(T::zero()); n * n];
    for p in 0..n {
        for q in 0..n {
            let mut acc = cr(T::zero());
            for iy in 0..n {
                for ix in 0..n {
                    acc += b[iy * n + ix] * T::of(sv[p][ix] * sv[q][iy]);
                }
            }
            coef[q * n + p] = acc / T::of(norm * (lam[p] + lam[q] + kh2));
        }
    }
    Vector::from_fn(n * n, |idx| {
        let (ix, iy) = (idx % n, idx / n);
        let mut acc = cr(T::zero());
        for p in 0..n {
            for q in 0..n {
                acc += coef[q * n + p] * T::of(sv[p][ix] * sv[q][iy]);
            }
        }
        acc
    })
}

/// Solves the biharmonic block system in two stages: `L v = b_v`, then `L u = b_u + h² v`.
pub fn biharmonic_two_stage<T: Real>(sys: &LinearSystem<T>) -> Result<Vector<T>, PdeError> {
    let m = sys.dim() / 2;
    let l = sys.a.submatrix(0, 0, m, m);
    let h2 = -sys.a[(0, m)].re;
    let v = direct_solve(&LinearSystem::new(l.clone(), sys.b.slice(m, m))?)?;
    let rhs = &sys.b.slice(0, m) + &v.scale_real(h2);
    let u = direct_solve(&LinearSystem::new(l, rhs)?)?;
    Ok(u.concat(&v))
}

/// Independent solution of the problem where one exists: sine modes for
/// zero-boundary Helmholtz, two-stage elimination for biharmonic.
pub fn oracle<T: Real>(p: &PdeProblem<T>, sys: &LinearSystem<T>) -> Result<Option<Vector<T>>, PdeError> {
    Ok(match (p.family, p.boundary) {
        (Family::Helmholtz1d, Boundary::Zero) => Some(sine_mode_solve_1d(p.n, p.k, &sys.b)),
        (Family::Helmholtz2d, Boundary::Zero) => Some(sine_mode_solve_2d(p.n, p.k, &sys.b)),
        (Family::Biharmonic1d | Family::Biharmonic2d, _) => Some(biharmonic_two_stage(sys)?),
        _ => None,
    })
}

/// Solver settings attached to a preset.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolverConfig {
    pub delta: f64,
    pub n_p: usize,
    /// `σ̂_min = lower · σ_min`.
    pub lower: f64,
    /// `σ̂_max = upper · σ_max`.
    pub upper: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { delta: 1e-3, n_p: 128, lower: 0.95, upper: 1.05 }
    }
}

impl SolverConfig {
    /// MAG parameters from bracketing bounds around the computed singular values.
    pub fn params<T: Real>(&self, a: &Matrix<T>) -> Result<MagParams<T>, PdeError> {
        let (lo, hi) = sigma_extremes(a)?;
        Ok(params_from_sigma(lo * T::of(self.lower), hi * T::of(self.upper))?)
    }
}

#[derive(Clone, Debug)]
pub struct Preset<T: Real> {
    pub name: &'static str,
    pub problem: PdeProblem<T>,
    pub config: SolverConfig,
}

pub const PRESET_NAMES: [&str; 14] = [
    "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4a", "fig4d", "fig5a", "fig5b", "fig5c", "fig5d", "fig6a",
    "fig6d",
];

pub fn preset<T: Real>(name: &str) -> Result<Preset<T>, PdeError> {
    let robin = Boundary::Robin(c(T::zero(), T::of(2.0)));
    let mixed = Boundary::Mixed(T::of(2.0));
    let (family, n, k, boundary, forcing) = match name {
        "fig3a" => (Family::Helmholtz1d, 16, 2.0, Boundary::Zero, Forcing::SineMix),
        "fig3b" => (Family::Helmholtz1d, 32, 2.0, Boundary::Zero, Forcing::SineMix),
        "fig3c" => (Family::Helmholtz1d, 32, 4.0, Boundary::Zero, Forcing::SineMix),
        "fig3d" => (Family::Helmholtz1d, 16, 2.0, robin, Forcing::Cosine),
        "fig3e" => (Family::Helmholtz1d, 32, 2.0, robin, Forcing::Cosine),
        "fig3f" => (Family::Helmholtz1d, 32, 4.0, robin, Forcing::Cosine),
        "fig4a" => (Family::Helmholtz2d, 16, 1.0, Boundary::Zero, Forcing::SineMix),
        "fig4d" => (Family::Helmholtz2d, 16, 1.0, robin, Forcing::Cosine),
        "fig5a" => (Family::Biharmonic1d, 16, 0.0, Boundary::Zero, Forcing::SineMix),
        "fig5b" => (Family::Biharmonic1d, 32, 0.0, Boundary::Zero, Forcing::SineMix),
        "fig5c" => (Family::Biharmonic1d, 16, 0.0, mixed, Forcing::Cosine),
        "fig5d" => (Family::Biharmonic1d, 32, 0.0, mixed, Forcing::Cosine),
        "fig6a" => (Family::Biharmonic2d, 16, 0.0, Boundary::Zero, Forcing::SineMix),
        "fig6d" => (Family::Biharmonic2d, 16, 0.0, mixed, Forcing::Cosine),
        _ => return Err(PdeError::UnknownPreset(name.to_string())),
    };
    let name = PRESET_NAMES.iter().find(|&&p| p == name).copied().expect("matched above");
    Ok(Preset { name, problem: PdeProblem { family, n, k: T::of(k), boundary, forcing }, config: SolverConfig::default() })
}
