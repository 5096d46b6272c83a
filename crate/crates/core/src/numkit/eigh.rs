use crate::numkit::{Matrix, NumError};
use crate::scalar::{cr, Real, C};

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues,
/// orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Rebuilds `V · diag(f(λ)) · V†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> C<T>) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<C<T>> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = cr(T::zero());
                for k in 0..n {
                    s += v[(i, k)] * fl[k] * v[(j, k)].conj();
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

/// Hermitian eigensolver: Householder reduction to real tridiagonal form
/// followed by implicit QL iterations.
pub fn eigh<T: Real>(m: &Matrix<T>) -> Result<HermitianEigen<T>, NumError> {
    if !m.is_square() {
        return Err(NumError::Shape(format!("eigh needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: Matrix::zeros(0, 0) });
    }
    let scale_ref = m.norm_max().max(T::min_positive_value());
    if m.hermitian_defect() > T::of(1e3) * T::epsilon() * scale_ref * T::of_usize(n) {
        return Err(NumError::NotHermitian);
    }
    let mut a = m.hermitian_part();
    let mut q = Matrix::<T>::identity(n);
    let mut off = vec![cr(T::zero()); n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if xnorm == T::zero() {
            off[k] = cr(T::zero());
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { cr(T::one()) };
        let alpha = -phase * xnorm;
        let mut v: Vec<C<T>> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vnorm == T::zero() {
            off[k] = a[(k + 1, k)];
            continue;
        }
        for z in v.iter_mut() {
            *z = *z / vnorm;
        }
        // p = A_sub v, K = v† p, w = p − K v, A_sub ← A_sub − 2 v w† − 2 w v†
        let mut p = vec![cr(T::zero()); len];
        for i in 0..len {
            let row = a.row(k + 1 + i);
            let mut s = cr(T::zero());
            for j in 0..len {
                s += row[k + 1 + j] * v[j];
            }
            p[i] = s;
        }
        let kk: C<T> = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let w: Vec<C<T>> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kk * vi).collect();
        let two = T::of(2.0);
        for i in 0..len {
            let row = a.row_mut(k + 1 + i);
            for j in 0..len {
                row[k + 1 + j] -= (v[i] * w[j].conj() + w[i] * v[j].conj()) * two;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = cr(T::zero());
            a[(k, i)] = cr(T::zero());
        }
        off[k] = alpha;
        // Q ← Q·(I − 2 v v†)
        for r in 0..n {
            let row = q.row_mut(r);
            let s: C<T> = (0..len).map(|j| row[k + 1 + j] * v[j]).sum();
            for j in 0..len {
                row[k + 1 + j] -= s * v[j].conj() * two;
            }
        }
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1, n - 2)];
    }

    // Phase scaling D so that D† T D is real symmetric tridiagonal.
    let mut d = vec![cr(T::one()); n];
    let mut e = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let r = off[k].norm();
        e[k] = r;
        d[k + 1] = if r > T::zero() { d[k] * (off[k] / r) } else { d[k] };
    }
    let mut diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    tql2(&mut diag, &mut e, &mut z, n)?;

    // vectors = Q · D · Z
    let mut qd = q;
    for r in 0..n {
        let row = qd.row_mut(r);
        for j in 0..n {
            row[j] *= d[j];
        }
    }
    let mut vecs = Matrix::zeros(n, n);
    for r in 0..n {
        let qrow = qd.row(r).to_vec();
        let out = vecs.row_mut(r);
        for (k, &qk) in qrow.iter().enumerate() {
            if qk.norm_sqr() == T::zero() {
                continue;
            }
            let zrow = &z[k * n..(k + 1) * n];
            for j in 0..n {
                out[j] += qk * zrow[j];
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only of a Hermitian matrix.
pub fn eigvalsh<T: Real>(m: &Matrix<T>) -> Result<Vec<T>, NumError> {
    Ok(eigh(m)?.values)
}

/// Symmetric tridiagonal QL with implicit shifts. `d` diagonal, `e[k]` couples
/// k and k+1; `z` (row-major n×n) accumulates eigenvectors as columns.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], z: &mut [T], n: usize) -> Result<(), NumError> {
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(NumError::NoConvergence("tridiagonal QL"));
            }
            let two = T::of(2.0);
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let row = &mut z[k * n..(k + 1) * n];
                    f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &Matrix<f64>, ev: &HermitianEigen<f64>) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..ev.values.len() {
            let x = ev.vectors.column(k);
            let r = &(m * &x) - &x.scale_real(ev.values[k]);
            worst = worst.max(r.norm2());
        }
        worst
    }

    #[test]
    fn diagonal_values() {
        let m = Matrix::<f64>::from_real_diag(&[3.0, 2.0]);
        let ev = eigh(&m).unwrap();
        assert_eq!(ev.values, vec![2.0, 3.0]);
    }

    #[test]
    fn complex_hermitian_residual() {
        let n = 7;
        let m = Matrix::<f64>::from_fn(n, n, |i, j| {
            let re = ((i + 2 * j) % 5) as f64 + ((j + 2 * i) % 5) as f64;
            let im = (i as f64 - j as f64) * 0.3;
            C::new(re, im)
        });
        let ev = eigh(&m).unwrap();
        assert!(residual(&m, &ev) < 1e-12 * m.norm_fro());
        let vv = ev.vectors.adjoint().matmul(&ev.vectors).unwrap();
        assert!(vv.max_abs_diff(&Matrix::identity(n)) < 1e-12);
        assert!(ev.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        let n = 6;
        let m = Matrix::<f64>::from_fn(n, n, |i, j| {
            if i == j {
                cr(-2.0)
            } else if i.abs_diff(j) == 1 {
                cr(1.0)
            } else {
                cr(0.0)
            }
        });
        let ev = eigh(&m).unwrap();
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let mut expect: Vec<f64> = (1..=n).map(|j| -4.0 * (j as f64 * h / 2.0).sin().powi(2)).collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.values.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Matrix::<f64>::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eigh(&m), Err(NumError::NotHermitian)));
    }
}
