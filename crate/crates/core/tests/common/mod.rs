#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schromag::numkit::{eigh, Matrix, Vector};
use schromag::{CMatrix, CVector, Complex64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    Matrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    Vector::from_fn(n, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Eigenvectors of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let m = random_matrix(rng, n, n);
    eigh(&m.hermitian_part()).expect("hermitian eigensolve").vectors
}

/// `U diag(σ) V†` with singular values spread log-uniformly over `[smin, smax]`,
/// both endpoints included. Returns the matrix and its singular values.
pub fn matrix_with_sigma(rng: &mut ChaCha8Rng, n: usize, smin: f64, smax: f64) -> (CMatrix, Vec<f64>) {
    let sigma: Vec<f64> = (0..n)
        .map(|j| match j {
            0 => smax,
            1 => smin,
            _ => smin * (smax / smin).powf(rng.gen_range(0.0..1.0)),
        })
        .collect();
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let d = Matrix::from_real_diag(&sigma);
    (&(&u * &d) * &v.adjoint(), sigma)
}

/// Random matrix rescaled to spectral norm `norm`.
pub fn matrix_with_norm(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> CMatrix {
    let m = random_matrix(rng, n, n);
    let s = schromag::numkit::norm2(&m).expect("norm");
    m.scale_real(norm / s)
}
