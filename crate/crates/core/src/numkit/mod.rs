//! Dense complex linear algebra: matrices, factorizations, eigensolvers,
//! matrix exponential action, Kronecker products and the direct-solve oracle.

mod eig;
mod eigh;
mod expm;
pub mod io;
mod lu;
mod matrix;
mod small;
mod svd;

pub use eig::{eig, eigvals, hessenberg, schur, EigenResult, Schur};
pub use eigh::{eigh, eigvalsh, HermitianEigen};
pub use expm::{expm, expm_apply};
pub use lu::{inverse, Lu};
pub use matrix::{kron, Matrix, Vector};
pub use small::{small_eigh, small_identity, small_unitary_apply, SmallMat};
pub use svd::{norm2, sigma_extremes, singular_values, svd, Svd};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("matrix is singular to working precision (condition estimate {cond:.3e})")]
    Singular { cond: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// The problem `A u = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem<T: Real> {
    pub a: Matrix<T>,
    pub b: Vector<T>,
}

impl<T: Real> LinearSystem<T> {
    pub fn new(a: Matrix<T>, b: Vector<T>) -> Result<Self, NumError> {
        if !a.is_square() {
            return Err(NumError::Shape(format!("system matrix must be square, got {}x{}", a.rows(), a.cols())));
        }
        if a.rows() != b.len() {
            return Err(NumError::Shape(format!("matrix has {} rows but rhs has {} entries", a.rows(), b.len())));
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `‖A u − b‖₂`.
    pub fn residual(&self, u: &Vector<T>) -> T {
        (&(&self.a * u) - &self.b).norm2()
    }
}

/// Ground-truth solve by LU with one step of iterative refinement.
pub fn direct_solve<T: Real>(sys: &LinearSystem<T>) -> Result<Vector<T>, NumError> {
    let lu = Lu::factor(&sys.a)?;
    let cond = lu.cond_estimate();
    let limit = T::one() / (T::of(100.0) * T::epsilon());
    if !(cond < limit) {
        return Err(NumError::Singular { cond: cond.to_f64_lossy() });
    }
    let mut u = lu.solve(&sys.b)?;
    let r = &sys.b - &(&sys.a * &u);
    let du = lu.solve(&r)?;
    u = &u + &du;
    Ok(u)
}
