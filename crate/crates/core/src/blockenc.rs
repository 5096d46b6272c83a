//! Block encodings as explicit dense unitaries with `(α, m, ε)` metadata,
//! their composition rules, state-preparation pairs, and the block layout of
//! the homogenized MAG generator.
//!
//! Ancilla qubits are always the most significant index: a unitary on
//! `m` ancillas and an `n`-dimensional system is indexed by `a · n + s`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::mag::TransformedSystem;
use crate::numkit::{eigh, kron, norm2, Matrix, NumError, Vector};
use crate::scalar::{c, cr, Real, C};
use crate::schrodingerize::HermitianSplit;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlockError {
    #[error("normalization {alpha:.6e} is below the spectral norm {norm:.6e}")]
    AlphaTooSmall { alpha: f64, norm: f64 },
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error("coefficient vector is zero")]
    ZeroCoefficients,
    #[error("measured error {measured:.3e} exceeds claimed {claimed:.3e}")]
    Verification { measured: f64, claimed: f64 },
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// `A ≈ α (⟨0^m| ⊗ I) U (|0^m⟩ ⊗ I)` within `ε`.
#[derive(Clone, Debug)]
pub struct BlockEncoding<T: Real> {
    pub u: Matrix<T>,
    pub alpha: T,
    pub m: usize,
    pub eps: T,
    pub n: usize,
}

fn pow2(m: usize) -> usize {
    1usize << m
}

/// `‖U U† − I‖_F`.
pub fn unitary_defect<T: Real>(u: &Matrix<T>) -> T {
    let p = u * &u.adjoint();
    (&p - &Matrix::identity(u.rows())).norm_fro()
}

impl<T: Real> BlockEncoding<T> {
    /// Wraps an existing unitary; checks shape and unitarity.
    pub fn new(u: Matrix<T>, alpha: T, m: usize, eps: T) -> Result<Self, BlockError> {
        if !u.is_square() || u.rows() % pow2(m) != 0 {
            return Err(BlockError::Incompatible(format!("{}x{} unitary with {m} ancillas", u.rows(), u.cols())));
        }
        let d = unitary_defect(&u);
        if d > T::of(1e-10) {
            return Err(BlockError::NotUnitary(d.to_f64_lossy()));
        }
        let n = u.rows() / pow2(m);
        Ok(Self { u, alpha, m, eps, n })
    }

    /// `α` times the top-left `n × n` block.
    pub fn encoded(&self) -> Matrix<T> {
        self.u.submatrix(0, 0, self.n, self.n).scale_real(self.alpha)
    }

    /// Same encoding with a different error claim.
    pub fn with_eps(mut self, eps: T) -> Self {
        self.eps = eps;
        self
    }
}

/// Square root of a Hermitian positive semidefinite matrix, clamping rounding
/// negatives at zero.
fn psd_sqrt<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>, BlockError> {
    let e = eigh(m)?;
    let tol = T::of(1e-12) * e.values.iter().fold(T::one(), |a, &v| a.max(v.abs()));
    if let Some(&bad) = e.values.iter().find(|&&v| v < -tol) {
        return Err(BlockError::Num(NumError::Shape(format!("matrix is not positive semidefinite (eigenvalue {bad})"))));
    }
    Ok(e.reconstruct_with(|v| cr(v.max(T::zero()).sqrt())))
}

/// Unitary dilation `[[a/α, √(I−aa†/α²)], [√(I−a†a/α²), −a†/α]]`.
pub fn dilate<T: Real>(a: &Matrix<T>, alpha: T) -> Result<BlockEncoding<T>, BlockError> {
    if !a.is_square() {
        return Err(BlockError::Incompatible(format!("dilation needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let norm = norm2(a)?;
    if !(alpha > T::zero()) || alpha < norm * (T::one() - T::of(1e-12)) {
        return Err(BlockError::AlphaTooSmall { alpha: alpha.to_f64_lossy(), norm: norm.to_f64_lossy() });
    }
    let n = a.rows();
    let s = a.scale_real(T::one() / alpha);
    let sd = s.adjoint();
    let id = Matrix::identity(n);
    let top = psd_sqrt(&(&id - &(&s * &sd)))?;
    let bottom = psd_sqrt(&(&id - &(&sd * &s)))?;
    let neg = -&sd;
    let u = Matrix::from_blocks(&[vec![Some(&s), Some(&top)], vec![Some(&bottom), Some(&neg)]])?;
    let be = BlockEncoding::new(u, alpha, 1, T::zero())?;
    let eps = measure_eps(&be, a)?;
    Ok(be.with_eps(eps))
}

/// `‖reference − α Π U Π†‖₂`.
pub fn measure_eps<T: Real>(be: &BlockEncoding<T>, reference: &Matrix<T>) -> Result<T, BlockError> {
    if reference.rows() != be.n || reference.cols() != be.n {
        return Err(BlockError::Incompatible(format!(
            "reference is {}x{}, encoding has n = {}",
            reference.rows(),
            reference.cols(),
            be.n
        )));
    }
    Ok(norm2(&(reference - &be.encoded()))?)
}

/// Measured error, failing when it exceeds the claim by more than `1e-10`.
pub fn verify<T: Real>(be: &BlockEncoding<T>, reference: &Matrix<T>) -> Result<T, BlockError> {
    let measured = measure_eps(be, reference)?;
    if measured > be.eps + T::of(1e-10) {
        return Err(BlockError::Verification { measured: measured.to_f64_lossy(), claimed: be.eps.to_f64_lossy() });
    }
    Ok(measured)
}

/// Report row for the verification JSON.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationRecord {
    pub name: String,
    pub alpha: f64,
    pub m: usize,
    pub eps_claimed: f64,
    pub eps_measured: f64,
    pub pass: bool,
}

pub fn record<T: Real>(name: &str, be: &BlockEncoding<T>, reference: &Matrix<T>) -> Result<VerificationRecord, BlockError> {
    let measured = measure_eps(be, reference)?;
    Ok(VerificationRecord {
        name: name.to_string(),
        alpha: be.alpha.to_f64_lossy(),
        m: be.m,
        eps_claimed: be.eps.to_f64_lossy(),
        eps_measured: measured.to_f64_lossy(),
        pass: measured <= be.eps + T::of(1e-10) && unitary_defect(&be.u) <= T::of(1e-10),
    })
}

/// The identity as a `(1, 0, 0)` encoding of itself.
pub fn identity_encoding<T: Real>(n: usize) -> BlockEncoding<T> {
    BlockEncoding { u: Matrix::identity(n), alpha: T::one(), m: 0, eps: T::zero(), n }
}

/// `U_c`, a `(1, 1, 0)` encoding of `|0⟩⟨1|`.
pub fn u_c<T: Real>() -> BlockEncoding<T> {
    let u = Matrix::from_real_rows(&[&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]);
    BlockEncoding { u, alpha: T::one(), m: 1, eps: T::zero(), n: 2 }
}

/// `|0⟩⟨1|` on a qubit.
pub fn ket0_bra1<T: Real>() -> Matrix<T> {
    Matrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

/// Adds `extra` idle ancillas as new most significant qubits: `I ⊗ U`.
pub fn normalize_ancilla<T: Real>(be: &BlockEncoding<T>, m_target: usize) -> Result<BlockEncoding<T>, BlockError> {
    if m_target < be.m {
        return Err(BlockError::Incompatible(format!("cannot shrink {} ancillas to {m_target}", be.m)));
    }
    let u = kron(&Matrix::identity(pow2(m_target - be.m)), &be.u);
    Ok(BlockEncoding { u, alpha: be.alpha, m: m_target, eps: be.eps, n: be.n })
}

/// Lifts `u` on `(anc_a, sys)` to `(anc_a, anc_b, sys)` acting trivially on `anc_b`.
fn lift_outer<T: Real>(u: &Matrix<T>, da: usize, db: usize, n: usize) -> Matrix<T> {
    let dim = da * db * n;
    Matrix::from_fn(dim, dim, |r, col| {
        let (a, rb) = (r / (db * n), r % (db * n));
        let (b, s) = (rb / n, rb % n);
        let (a2, cb) = (col / (db * n), col % (db * n));
        let (b2, s2) = (cb / n, cb % n);
        if b == b2 {
            u[(a * n + s, a2 * n + s2)]
        } else {
            cr(T::zero())
        }
    })
}

/// `A₁ A₂` with `(α₁α₂, m₁+m₂, α₁ε₂ + α₂ε₁)`; ancilla order `anc₁ ⊗ anc₂ ⊗ sys`.
pub fn product<T: Real>(e1: &BlockEncoding<T>, e2: &BlockEncoding<T>) -> Result<BlockEncoding<T>, BlockError> {
    if e1.n != e2.n {
        return Err(BlockError::Incompatible(format!("product of n = {} and n = {}", e1.n, e2.n)));
    }
    let n = e1.n;
    let (d1, d2) = (pow2(e1.m), pow2(e2.m));
    let w1 = lift_outer(&e1.u, d1, d2, n);
    let w2 = kron(&Matrix::identity(d1), &e2.u);
    Ok(BlockEncoding {
        u: &w1 * &w2,
        alpha: e1.alpha * e2.alpha,
        m: e1.m + e2.m,
        eps: e1.alpha * e2.eps + e2.alpha * e1.eps,
        n,
    })
}

/// `A₁ ⊗ A₂` with `(α₁α₂, m₁+m₂, α₁²ε₂ + α₂²ε₁ + ε₁ε₂)`; the unitary
/// `U₁ ⊗ U₂` is reordered to `anc₁ ⊗ anc₂ ⊗ sys₁ ⊗ sys₂`.
pub fn tensor<T: Real>(e1: &BlockEncoding<T>, e2: &BlockEncoding<T>) -> BlockEncoding<T> {
    let (d1, d2) = (pow2(e1.m), pow2(e2.m));
    let (n1, n2) = (e1.n, e2.n);
    let dim = d1 * d2 * n1 * n2;
    // index in anc1, anc2, sys1, sys2 order -> index in anc1, sys1, anc2, sys2 order
    let to_raw = |i: usize| {
        let s2 = i % n2;
        let s1 = (i / n2) % n1;
        let a2 = (i / (n1 * n2)) % d2;
        let a1 = i / (n1 * n2 * d2);
        ((a1 * n1 + s1) * d2 + a2) * n2 + s2
    };
    let raw = kron(&e1.u, &e2.u);
    let u = Matrix::from_fn(dim, dim, |r, col| raw[(to_raw(r), to_raw(col))]);
    let (a1, a2) = (e1.alpha, e2.alpha);
    BlockEncoding {
        u,
        alpha: a1 * a2,
        m: e1.m + e2.m,
        eps: a1 * a1 * e2.eps + a2 * a2 * e1.eps + e1.eps * e2.eps,
        n: n1 * n2,
    }
}

/// `s A` with `(|s|α, m, |s|ε)`; a complex phase is absorbed into the unitary.
pub fn scalar<T: Real>(s: C<T>, e: &BlockEncoding<T>) -> Result<BlockEncoding<T>, BlockError> {
    let mag = s.norm();
    if !(mag > T::zero()) {
        return Err(BlockError::ZeroCoefficients);
    }
    Ok(BlockEncoding { u: e.u.scale(s / mag), alpha: mag * e.alpha, m: e.m, eps: mag * e.eps, n: e.n })
}

/// `A†` with the same parameters.
pub fn adjoint<T: Real>(e: &BlockEncoding<T>) -> BlockEncoding<T> {
    BlockEncoding { u: e.u.adjoint(), alpha: e.alpha, m: e.m, eps: e.eps, n: e.n }
}

/// `(P_L, P_R)` whose first columns `c`, `d` satisfy `β c̄_j d_j ≈ y_j`.
#[derive(Clone, Debug)]
pub struct StatePrepPair<T: Real> {
    pub p_l: Matrix<T>,
    pub p_r: Matrix<T>,
    pub beta: T,
    pub b_qubits: usize,
    pub eps: T,
}

impl<T: Real> StatePrepPair<T> {
    /// `Σ_j |β c̄_j d_j − y_j|`, with `y_j = 0` beyond the given coefficients.
    pub fn coefficient_error(&self, y: &[T]) -> T {
        let dim = self.p_l.rows();
        (0..dim)
            .map(|j| {
                let got = self.p_l[(j, 0)].conj() * self.p_r[(j, 0)] * self.beta;
                let want = y.get(j).copied().unwrap_or(T::zero());
                (got - cr(want)).norm()
            })
            .sum()
    }
}

/// Unitary whose first column is the unit vector `v` (Gram-Schmidt on the
/// standard basis).
pub fn complete_unitary<T: Real>(v: &Vector<T>) -> Matrix<T> {
    let dim = v.len();
    let mut cols: Vec<Vector<T>> = vec![v.scale_real(T::one() / v.norm2())];
    for k in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut w = Vector::basis(dim, k);
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dot(&w);
                w.axpy(-proj, q);
            }
        }
        let nw = w.norm2();
        if nw > T::of(1e-8) {
            cols.push(w.scale_real(T::one() / nw));
        }
    }
    let mut u = Matrix::zeros(dim, dim);
    for (j, col) in cols.iter().enumerate() {
        u.set_column(j, col);
    }
    u
}

/// `c_j = √(|y_j|/β)`, `d_j = c_j e^{i arg y_j}`, `β = ‖y‖₁`, on
/// `max(1, ⌈log₂ s⌉)` qubits.
pub fn build_state_prep_pair<T: Real>(y: &[T]) -> Result<StatePrepPair<T>, BlockError> {
    let beta: T = y.iter().map(|v| v.abs()).sum();
    if y.is_empty() || !(beta > T::zero()) || !beta.is_finite() {
        return Err(BlockError::ZeroCoefficients);
    }
    let b_qubits = (y.len().next_power_of_two().trailing_zeros() as usize).max(1);
    let dim = pow2(b_qubits);
    let cvec = Vector::from_fn(dim, |j| cr(y.get(j).map_or(T::zero(), |v| (v.abs() / beta).sqrt())));
    let dvec = Vector::from_fn(dim, |j| match y.get(j) {
        Some(v) if *v < T::zero() => -cvec[j],
        _ => cvec[j],
    });
    let mut pair = StatePrepPair { p_l: complete_unitary(&cvec), p_r: complete_unitary(&dvec), beta, b_qubits, eps: T::zero() };
    pair.eps = pair.coefficient_error(y);
    Ok(pair)
}

/// `Σ y_k A_k` via `(P_L† ⊗ I) W (P_R ⊗ I)` with the select unitary
/// `W = Σ_k |k⟩⟨k| ⊗ U_k + (I − Σ_k |k⟩⟨k|) ⊗ I`. The sandwich encodes the
/// combination with normalization `αβ`; the error claim is `αε₁ + αβε₂`.
pub fn linear_combination<T: Real>(
    ops: &[&BlockEncoding<T>],
    pair: &StatePrepPair<T>,
) -> Result<BlockEncoding<T>, BlockError> {
    let first = ops.first().ok_or(BlockError::ZeroCoefficients)?;
    let (alpha, m, n) = (first.alpha, first.m, first.n);
    let eps1 = ops.iter().map(|o| o.eps).fold(T::zero(), T::max);
    for op in ops {
        if op.m != m || op.n != n || (op.alpha - alpha).abs() > T::of(1e-12) * alpha {
            return Err(BlockError::Incompatible("linear combination needs a common (alpha, m, n)".into()));
        }
    }
    let dl = pair.p_l.rows();
    if ops.len() > dl {
        return Err(BlockError::Incompatible(format!("{} operands but the pair prepares {dl} amplitudes", ops.len())));
    }
    let inner = pow2(m) * n;
    let mut w = Matrix::identity(dl * inner);
    for (k, op) in ops.iter().enumerate() {
        w.set_submatrix(k * inner, k * inner, &op.u);
    }
    let id = Matrix::identity(inner);
    let left = kron(&pair.p_l.adjoint(), &id);
    let right = kron(&pair.p_r, &id);
    let u = &(&left * &w) * &right;
    Ok(BlockEncoding {
        u,
        alpha: alpha * pair.beta,
        m: m + pair.b_qubits,
        eps: alpha * eps1 + alpha * pair.beta * pair.eps,
        n,
    })
}

/// Nonzero `n × n` blocks `J_ij` of `h1` and `h2` on the 4×4 block grid.
#[derive(Clone, Debug)]
pub struct HomoBlocks<T: Real> {
    pub n: usize,
    pub h1: BTreeMap<(usize, usize), Matrix<T>>,
    pub h2: BTreeMap<(usize, usize), Matrix<T>>,
}

fn assemble<T: Real>(n: usize, blocks: &BTreeMap<(usize, usize), Matrix<T>>) -> Matrix<T> {
    let mut m = Matrix::zeros(4 * n, 4 * n);
    for (&(i, j), b) in blocks {
        m.set_submatrix(i * n, j * n, b);
    }
    m
}

impl<T: Real> HomoBlocks<T> {
    /// `Σ |i⟩⟨j| ⊗ J_ij` for `h1`.
    pub fn reconstruct_h1(&self) -> Matrix<T> {
        assemble(self.n, &self.h1)
    }

    pub fn reconstruct_h2(&self) -> Matrix<T> {
        assemble(self.n, &self.h2)
    }
}

fn nonzero_blocks<T: Real>(m: &Matrix<T>, n: usize) -> BTreeMap<(usize, usize), Matrix<T>> {
    let mut out = BTreeMap::new();
    for i in 0..4 {
        for j in 0..4 {
            let b = m.submatrix(i * n, j * n, n, n);
            if b.norm_max() > T::zero() {
                out.insert((i, j), b);
            }
        }
    }
    out
}

pub fn decompose_homo<T: Real>(hs: &HermitianSplit<T>, n: usize) -> Result<HomoBlocks<T>, BlockError> {
    if n == 0 || hs.dim() != 4 * n {
        return Err(BlockError::Incompatible(format!("split has dimension {}, expected 4n = {}", hs.dim(), 4 * n)));
    }
    Ok(HomoBlocks { n, h1: nonzero_blocks(&hs.h1, n), h2: nonzero_blocks(&hs.h2, n) })
}

/// Where one of the listed Hamiltonian blocks actually lives.
#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianBlockCheck {
    pub label: String,
    pub formula: &'static str,
    /// `hermitian`, `anti-hermitian` or `neither`.
    pub found_in: &'static str,
    pub hermitian_dev: f64,
    pub anti_hermitian_dev: f64,
}

/// Compares the listed blocks `J00, J01, J10, J11, J02, J13, J20, J31` with
/// the blocks of `h1` and of the anti-Hermitian part `i h2`. The coupling
/// blocks are taken as `½γ_F I`, which is the listed `½I` at `γ_F = 1`.
pub fn hamiltonian_block_report<T: Real>(
    sys: &TransformedSystem<T>,
    hs: &HermitianSplit<T>,
    gamma_f: T,
) -> Result<Vec<HamiltonianBlockCheck>, BlockError> {
    let n = sys.n;
    let blocks = decompose_homo(hs, n)?;
    let anti = hs.h2.scale(c(T::zero(), T::one()));
    let p = &sys.params;
    let cpl = p.coupling();
    let id = Matrix::identity(n);
    let half_g = id.scale_real(T::of(0.5) * gamma_f);
    let listed: Vec<(&str, &'static str, (usize, usize), Matrix<T>)> = vec![
        ("J00", "-alpha A^T A", (0, 0), sys.a.gram().scale_real(-p.alpha)),
        ("J01", "-sqrt(alpha beta) A^T", (0, 1), sys.a.adjoint().scale_real(-cpl)),
        ("J10", "sqrt(alpha beta) A", (1, 0), sys.a.scale_real(cpl)),
        ("J11", "-I", (1, 1), id.scale_real(-T::one())),
        ("J02", "I/2", (0, 2), half_g.clone()),
        ("J13", "I/2", (1, 3), half_g.clone()),
        ("J20", "I/2", (2, 0), half_g.clone()),
        ("J31", "I/2", (3, 1), half_g),
    ];
    let tol = T::of(1e-10);
    let mut out = Vec::new();
    for (label, formula, (i, j), reference) in listed {
        let zero = Matrix::zeros(n, n);
        let hb = blocks.h1.get(&(i, j)).unwrap_or(&zero);
        let ab = anti.submatrix(i * n, j * n, n, n);
        let dh = hb.max_abs_diff(&reference);
        let da = ab.max_abs_diff(&reference);
        let found_in = if dh <= tol {
            "hermitian"
        } else if da <= tol {
            "anti-hermitian"
        } else {
            "neither"
        };
        out.push(HamiltonianBlockCheck {
            label: label.into(),
            formula,
            found_in,
            hermitian_dev: dh.to_f64_lossy(),
            anti_hermitian_dev: da.to_f64_lossy(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mag::{build_transformed, derive_params};
    use crate::schrodingerize::{homogenize, split, to_ode};

    #[test]
    fn dilate_scalar() {
        let be = dilate(&Matrix::<f64>::from_real_rows(&[&[0.5]]), 1.0).unwrap();
        let h = 0.75f64.sqrt();
        let expect = Matrix::from_real_rows(&[&[0.5, h], &[h, -0.5]]);
        assert!(be.u.max_abs_diff(&expect) < 1e-12);
        assert!(unitary_defect(&be.u) < 1e-12);
        assert_eq!((be.m, be.n), (1, 1));
    }

    #[test]
    fn dilate_identity() {
        let be = dilate(&Matrix::<f64>::identity(2), 1.0).unwrap();
        let mut expect = Matrix::identity(4);
        expect[(2, 2)] = cr(-1.0);
        expect[(3, 3)] = cr(-1.0);
        assert!(be.u.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn dilate_rejects_small_alpha() {
        let a = Matrix::<f64>::from_real_diag(&[2.0, 0.5]);
        assert!(matches!(dilate(&a, 1.0), Err(BlockError::AlphaTooSmall { .. })));
        assert!(dilate(&a, 2.0).is_ok());
    }

    #[test]
    fn u_c_encodes_ket0_bra1() {
        let uc = u_c::<f64>();
        assert!(unitary_defect(&uc.u) == 0.0);
        assert_eq!(verify(&uc, &ket0_bra1()).unwrap(), 0.0);
        let d = dilate(&ket0_bra1::<f64>(), 1.0).unwrap();
        assert!(d.u.submatrix(0, 0, 2, 2).max_abs_diff(&uc.u.submatrix(0, 0, 2, 2)) < 1e-15);
    }

    #[test]
    fn identity_encodes_identity() {
        let e = identity_encoding::<f64>(3);
        assert_eq!(verify(&e, &Matrix::identity(3)).unwrap(), 0.0);
    }

    #[test]
    fn corrupted_unitary_detected() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.3, 0.1], &[0.0, -0.2]]);
        let mut be = dilate(&a, 1.0).unwrap();
        be.u[(0, 1)] += cr(1e-3);
        let measured = measure_eps(&be, &a).unwrap();
        assert!((measured - 1e-3).abs() < 1e-9);
        assert!(matches!(verify(&be, &a), Err(BlockError::Verification { .. })));
    }

    #[test]
    fn adjoint_of_dilation() {
        let a = Matrix::<f64>::from_fn(3, 3, |i, j| C::new(0.1 * (i + j) as f64, 0.05 * i as f64 - 0.1 * j as f64));
        let be = dilate(&a, 1.0).unwrap();
        let ad = adjoint(&be);
        assert!(verify(&ad, &a.adjoint()).unwrap() < 1e-12);
        assert_eq!(ad.alpha, be.alpha);
    }

    #[test]
    fn product_of_dilations() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.6, 0.2], &[-0.1, 0.4]]);
        let e1 = dilate(&a, 1.0).unwrap();
        let e2 = dilate(&a.adjoint(), 1.5).unwrap();
        let p = product(&e1, &e2).unwrap();
        assert_eq!((p.m, p.alpha), (2, 1.5));
        assert!(unitary_defect(&p.u) < 1e-12);
        assert!(verify(&p, &(&a * &a.adjoint())).unwrap() < 1e-12);
    }

    #[test]
    fn tensor_of_scalars() {
        let e = dilate(&Matrix::<f64>::from_real_rows(&[&[0.5]]), 1.0).unwrap();
        let t = tensor(&e, &e);
        assert_eq!((t.n, t.m, t.alpha), (1, 2, 1.0));
        assert!(verify(&t, &Matrix::from_real_rows(&[&[0.25]])).unwrap() < 1e-12);
    }

    #[test]
    fn tensor_ordering() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.3]]);
        let b = Matrix::<f64>::from_real_rows(&[&[0.2, 0.0, 0.1], &[0.0, -0.4, 0.0], &[0.3, 0.0, 0.1]]);
        let t = tensor(&dilate(&a, 1.0).unwrap(), &dilate(&b, 1.0).unwrap());
        assert!(unitary_defect(&t.u) < 1e-12);
        assert!(verify(&t, &kron(&a, &b)).unwrap() < 1e-12);
    }

    #[test]
    fn tensor_claim_needs_alpha_at_least_one() {
        // with α < 1 the listed tensor bound undercounts the cross terms
        let a = Matrix::<f64>::from_real_rows(&[&[0.1]]);
        let e1 = dilate(&Matrix::from_real_rows(&[&[0.1 + 0.01]]), 0.2).unwrap();
        let e1 = e1.clone().with_eps(measure_eps(&e1, &a).unwrap());
        let t = tensor(&e1, &e1);
        let measured = measure_eps(&t, &kron(&a, &a)).unwrap();
        assert!(measured > t.eps, "measured {measured} claim {}", t.eps);
    }

    #[test]
    fn scalar_and_phase() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.4, 0.0], &[0.1, 0.2]]);
        let e = dilate(&a, 1.0).unwrap();
        let s = scalar(C::new(0.0, -2.0), &e).unwrap();
        assert_eq!(s.alpha, 2.0);
        assert!(verify(&s, &a.scale(C::new(0.0, -2.0))).unwrap() < 1e-12);
        assert!(scalar(cr(0.0), &e).is_err());
    }

    #[test]
    fn state_prep_examples() {
        let p = build_state_prep_pair(&[1.0f64]).unwrap();
        assert_eq!((p.beta, p.b_qubits), (1.0, 1));
        assert!(p.coefficient_error(&[1.0]) < 1e-12);
        let p = build_state_prep_pair(&[0.5f64, 0.5]).unwrap();
        assert!((p.p_l[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15 && (p.p_r[(1, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.beta, 1.0);
        let p = build_state_prep_pair(&[1.0f64, -1.0]).unwrap();
        assert_eq!(p.beta, 2.0);
        assert!(p.coefficient_error(&[1.0, -1.0]) < 1e-12);
        let p = build_state_prep_pair(&[0.3f64, -0.2, 0.5]).unwrap();
        assert_eq!(p.b_qubits, 2);
        assert!(unitary_defect(&p.p_l) < 1e-12 && unitary_defect(&p.p_r) < 1e-12);
        assert!(p.coefficient_error(&[0.3, -0.2, 0.5]) < 1e-12);
        assert!(build_state_prep_pair::<f64>(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn sum_of_identical_operands() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.4, 0.3], &[-0.2, 0.1]]);
        let e = dilate(&a, 1.0).unwrap();
        let pair = build_state_prep_pair(&[0.5, 0.5]).unwrap();
        let s = linear_combination(&[&e, &e], &pair).unwrap();
        assert_eq!((s.alpha, s.m), (1.0, 2));
        assert!(unitary_defect(&s.u) < 1e-12);
        assert!(verify(&s, &a).unwrap() < 1e-12);
    }

    #[test]
    fn sum_with_signs() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.4, 0.3], &[-0.2, 0.1]]);
        let b = Matrix::<f64>::from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let y = [0.7, -1.3];
        let pair = build_state_prep_pair(&y).unwrap();
        let s = linear_combination(&[&dilate(&a, 1.0).unwrap(), &dilate(&b, 1.0).unwrap()], &pair).unwrap();
        let reference = &a.scale_real(0.7) - &b.scale_real(1.3);
        assert!((s.alpha - 2.0).abs() < 1e-15);
        assert!(verify(&s, &reference).unwrap() < 1e-12);
    }

    #[test]
    fn padding_keeps_encoding() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.4, 0.3], &[-0.2, 0.1]]);
        let e = dilate(&a, 1.0).unwrap();
        let p = normalize_ancilla(&e, 3).unwrap();
        assert_eq!((p.m, p.u.rows()), (3, 16));
        assert!(verify(&p, &a).unwrap() < 1e-12);
        assert!(normalize_ancilla(&p, 1).is_err());
    }

    fn mag_split() -> (TransformedSystem<f64>, HermitianSplit<f64>, f64) {
        let a = Matrix::from_real_rows(&[&[2.0, 0.5], &[0.0, 1.0]]);
        let sys = build_transformed(&a, &Vector::from_real(&[1.0, 1.0]), derive_params(6.0, 0.5).unwrap()).unwrap();
        let (g, f) = to_ode(&sys);
        let gf = 0.7;
        let hs = homogenize(&g, &f, &Vector::zeros(4), gf).unwrap();
        (sys, split(&hs), gf)
    }

    #[test]
    fn decompose_reconstructs() {
        let (sys, sp, _) = mag_split();
        let blocks = decompose_homo(&sp, 2).unwrap();
        assert!(blocks.reconstruct_h1().max_abs_diff(&sp.h1) < 1e-15);
        assert!(blocks.reconstruct_h2().max_abs_diff(&sp.h2) < 1e-15);
        let j00 = &blocks.h1[&(0, 0)];
        assert!(j00.max_abs_diff(&sys.a.gram().scale_real(-sys.params.alpha)) < 1e-12);
        for (&(i, j), b) in &blocks.h1 {
            let other = blocks.h1.get(&(j, i)).expect("symmetric partner");
            assert!(b.max_abs_diff(&other.adjoint()) < 1e-12);
        }
        assert!(decompose_homo(&sp, 3).is_err());
    }

    #[test]
    fn hamiltonian_blocks_located() {
        let (sys, sp, gf) = mag_split();
        let rep = hamiltonian_block_report(&sys, &sp, gf).unwrap();
        let find = |l: &str| rep.iter().find(|r| r.label == l).unwrap().found_in;
        assert_eq!(find("J00"), "hermitian");
        assert_eq!(find("J01"), "anti-hermitian");
        assert_eq!(find("J10"), "anti-hermitian");
        assert_eq!(find("J11"), "neither");
        for l in ["J02", "J13", "J20", "J31"] {
            assert_eq!(find(l), "hermitian");
        }
    }
}
