use crate::numkit::{Matrix, NumError, Vector};
use crate::scalar::{cr, Real, C};

/// Thin singular value decomposition `A = U · diag(s) · V†`, `s` descending.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub u: Matrix<T>,
    pub s: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let k = self.s.len();
        let us = Matrix::from_fn(self.u.rows(), k, |i, j| self.u[(i, j)] * self.s[j]);
        &us * &self.v.adjoint()
    }

    pub fn sigma_max(&self) -> T {
        self.s.first().copied().unwrap_or_else(T::zero)
    }

    pub fn sigma_min(&self) -> T {
        self.s.last().copied().unwrap_or_else(T::zero)
    }
}

/// One-sided Jacobi SVD.
pub fn svd<T: Real>(a: &Matrix<T>) -> Result<Svd<T>, NumError> {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    let (m, n) = (a.rows(), a.cols());
    // unit max entry keeps squared column norms away from underflow
    let scale = a.norm_max();
    let inv = if scale > T::zero() { T::one() / scale } else { T::one() };
    // Work column-major: cols[j] is column j.
    let mut cols: Vec<Vec<C<T>>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)] * inv).collect()).collect();
    let mut vcols: Vec<Vec<C<T>>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { cr(T::one()) } else { cr(T::zero()) }).collect())
        .collect();
    // the computed inner product carries ~m·eps relative noise
    let tol = T::of(4.0) * T::epsilon() * T::of_usize(m.max(1));
    // a column this small is a zero singular value; rotating it only mixes in rounding noise
    let negligible = T::epsilon().powi(4);
    let mut converged = false;
    let mut worst = T::zero();
    for _sweep in 0..80 {
        let mut rotated = false;
        worst = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                let alpha: T = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C<T> = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                let norms = alpha.sqrt() * beta.sqrt();
                if g == T::zero() || alpha.min(beta) <= negligible || g <= tol * norms {
                    continue;
                }
                worst = worst.max(g / norms);
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (T::of(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let pc = phase.conj();
                for (xs, i) in [(&mut cols, m), (&mut vcols, n)] {
                    for r in 0..i {
                        let xp = xs[p][r];
                        let xq = xs[q][r] * pc;
                        xs[p][r] = xp * c - xq * s;
                        xs[q][r] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    // sweeps stalled at the rounding floor still give accurate values
    if !converged && !(worst <= T::of(1e3) * tol) {
        return Err(NumError::NoConvergence("one-sided Jacobi SVD"));
    }
    let norms: Vec<T> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<T> = order.iter().map(|&j| norms[j] / inv).collect();
    let smax = order.first().map(|&j| norms[j]).unwrap_or_else(T::zero);
    let mut u = Matrix::zeros(m, n);
    let mut v = Matrix::zeros(n, n);
    let mut filled = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        for r in 0..n {
            v[(r, k)] = vcols[j][r];
        }
        if norms[j] > smax * T::epsilon() * T::of_usize(m) && norms[j] > T::zero() {
            for r in 0..m {
                u[(r, k)] = cols[j][r] / norms[j];
            }
            filled.push(k);
        }
    }
    complete_orthonormal(&mut u, &filled);
    Ok(Svd { u, s, v })
}

/// Fills the columns of `u` not in `filled` with an orthonormal completion.
fn complete_orthonormal<T: Real>(u: &mut Matrix<T>, filled: &[usize]) {
    let (m, n) = (u.rows(), u.cols());
    let mut basis: Vec<Vector<T>> = filled.iter().map(|&k| u.column(k)).collect();
    let mut candidate = 0;
    for k in 0..n {
        if filled.contains(&k) {
            continue;
        }
        while candidate < m {
            let mut x = Vector::basis(m, candidate);
            candidate += 1;
            for _ in 0..2 {
                for b in &basis {
                    let d = b.dot(&x);
                    x.axpy(-d, b);
                }
            }
            let nx = x.norm2();
            if nx > T::of(1e-3) {
                let x = x.scale_real(T::one() / nx);
                u.set_column(k, &x);
                basis.push(x);
                break;
            }
        }
    }
}

/// Singular values only, descending.
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Result<Vec<T>, NumError> {
    Ok(svd(a)?.s)
}

/// Spectral norm.
pub fn norm2<T: Real>(a: &Matrix<T>) -> Result<T, NumError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(T::zero());
    }
    Ok(svd(a)?.sigma_max())
}

/// Extreme singular values `(σ_min, σ_max)` of a square matrix via the
/// Hermitian eigenproblem of `A†A`; fast for large dense operators.
pub fn sigma_extremes<T: Real>(a: &Matrix<T>) -> Result<(T, T), NumError> {
    let ev = crate::numkit::eigh(&a.gram())?;
    let lo = ev.min().max(T::zero()).sqrt();
    let hi = ev.max().max(T::zero()).sqrt();
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_singular_values() {
        let a = Matrix::<f64>::from_real_diag(&[0.1, 10.0]);
        let s = svd(&a).unwrap();
        assert!((s.s[0] - 10.0).abs() < 1e-14 && (s.s[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rectangular_reconstruction() {
        let a = Matrix::<f64>::from_fn(5, 3, |i, j| C::new((i + j) as f64 * 0.5 - 1.0, (i * j) as f64 * 0.1));
        let s = svd(&a).unwrap();
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-13);
        let w = svd(&a.adjoint()).unwrap();
        assert!(w.reconstruct().max_abs_diff(&a.adjoint()) < 1e-13);
        let uu = s.u.adjoint().matmul(&s.u).unwrap();
        assert!(uu.max_abs_diff(&Matrix::identity(3)) < 1e-12);
    }

    #[test]
    fn rank_deficient_still_orthonormal() {
        let a = Matrix::<f64>::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[0.0, 0.0]]);
        let s = svd(&a).unwrap();
        assert!(s.s[1] < 1e-14);
        let uu = s.u.adjoint().matmul(&s.u).unwrap();
        assert!(uu.max_abs_diff(&Matrix::identity(2)) < 1e-12);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn extremes_agree_with_svd() {
        let a = Matrix::<f64>::from_fn(6, 6, |i, j| cr(if i == j { 3.0 + i as f64 } else { 0.3 / (1.0 + (i + j) as f64) }));
        let s = svd(&a).unwrap();
        let (lo, hi) = sigma_extremes(&a).unwrap();
        assert!((lo - s.sigma_min()).abs() < 1e-12 && (hi - s.sigma_max()).abs() < 1e-12);
    }

    #[test]
    fn tiny_scale_matches_unit_scale() {
        let base = Matrix::<f64>::from_fn(5, 5, |i, j| C::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3));
        let s1 = svd(&base).unwrap().s;
        let s2 = svd(&base.scale_real(1e-170)).unwrap().s;
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a * 1e-170 - b).abs() <= 1e-12 * s1[0] * 1e-170);
        }
    }

    #[test]
    fn rank_one_has_zero_tail() {
        let x = Vector::<f64>::from_fn(6, |i| C::new(1.0 + i as f64, 0.5 - 0.2 * i as f64));
        let y = Vector::<f64>::from_fn(6, |i| C::new(0.3 * i as f64 - 1.0, 0.1));
        let a = Matrix::from_fn(6, 6, |i, j| x[i] * y[j].conj());
        let s = svd(&a).unwrap();
        assert!((s.s[0] - x.norm2() * y.norm2()).abs() < 1e-12 * s.s[0]);
        assert!(s.s[1..].iter().all(|&v| v < 1e-13 * s.s[0]));
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-12 * s.s[0]);
    }
}
