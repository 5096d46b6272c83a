use crate::numkit::{Matrix, NumError};
use crate::scalar::{cr, Real, C};

/// Eigenpairs of a general square matrix; eigenvectors are unit columns.
#[derive(Clone, Debug)]
pub struct EigenResult<T: Real> {
    pub values: Vec<C<T>>,
    pub vectors: Matrix<T>,
}

impl<T: Real> EigenResult<T> {
    pub fn spectral_radius(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Largest `‖M x − λ x‖ / (‖M‖_F ‖x‖)` over all pairs.
    pub fn max_residual(&self, m: &Matrix<T>) -> T {
        let scale = m.norm_fro().max(T::min_positive_value());
        (0..self.values.len())
            .map(|k| {
                let x = self.vectors.column(k);
                let r = &(m * &x) - &x.scale(self.values[k]);
                r.norm2() / (scale * x.norm2())
            })
            .fold(T::zero(), T::max)
    }
}

/// Complex Schur form `A = Z T Z†` with `T` upper triangular.
#[derive(Clone, Debug)]
pub struct Schur<T: Real> {
    pub t: Matrix<T>,
    pub z: Matrix<T>,
}

fn householder_vector<T: Real>(x: &[C<T>]) -> Option<(Vec<C<T>>, C<T>)> {
    let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if xnorm == T::zero() {
        return None;
    }
    let x0 = x[0];
    let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { cr(T::one()) };
    let alpha = -phase * xnorm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if vnorm == T::zero() {
        return None;
    }
    for z in v.iter_mut() {
        *z = *z / vnorm;
    }
    Some((v, alpha))
}

/// Reduces `a` to upper Hessenberg form, returning `(H, Q)` with `a = Q H Q†`.
pub fn hessenberg<T: Real>(a: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    let two = T::of(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some((v, _)) = householder_vector(&x) else { continue };
        // H ← (I − 2vv†) H
        for j in k..n {
            let s: C<T> = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= v[i] * s * two;
            }
        }
        // H ← H (I − 2vv†), Q ← Q (I − 2vv†)
        for m in [&mut h, &mut q] {
            for r in 0..n {
                let row = m.row_mut(r);
                let s: C<T> = (0..v.len()).map(|i| row[k + 1 + i] * v[i]).sum();
                for i in 0..v.len() {
                    row[k + 1 + i] -= s * v[i].conj() * two;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = cr(T::zero());
        }
    }
    (h, q)
}

/// Givens pair `(c, s)` with `[c, s; −s̄, c]·[a; b] = [r; 0]`.
fn givens<T: Real>(a: C<T>, b: C<T>) -> (T, C<T>) {
    let an = a.norm();
    let bn = b.norm();
    if bn == T::zero() {
        return (T::one(), cr(T::zero()));
    }
    if an == T::zero() {
        return (T::zero(), b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Complex Schur decomposition by shifted QR on the Hessenberg form.
pub fn schur<T: Real>(a: &Matrix<T>) -> Result<Schur<T>, NumError> {
    if !a.is_square() {
        return Err(NumError::Shape(format!("eig needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    let (mut h, mut z) = hessenberg(a);
    if n <= 1 {
        return Ok(Schur { t: h, z });
    }
    let eps = T::epsilon();
    let norm = h.norm_fro().max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == T::zero() { norm } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = cr(T::zero());
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return Err(NumError::NoConvergence("complex QR"));
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + cr(h[(hi, hi - 1)].norm() * T::of(0.75))
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            let (c, s) = givens(x, y);
            let cc = cr(c);
            let col0 = if k > l { k - 1 } else { l };
            for j in col0..n {
                let a0 = h[(k, j)];
                let a1 = h[(k + 1, j)];
                h[(k, j)] = cc * a0 + s * a1;
                h[(k + 1, j)] = -s.conj() * a0 + cc * a1;
            }
            let rmax = (k + 2).min(hi);
            for i in 0..=rmax {
                let a0 = h[(i, k)];
                let a1 = h[(i, k + 1)];
                h[(i, k)] = cc * a0 + s.conj() * a1;
                h[(i, k + 1)] = -s * a0 + cc * a1;
            }
            for i in 0..n {
                let a0 = z[(i, k)];
                let a1 = z[(i, k + 1)];
                z[(i, k)] = cc * a0 + s.conj() * a1;
                z[(i, k + 1)] = -s * a0 + cc * a1;
            }
            if k > l {
                h[(k + 1, k - 1)] = cr(T::zero());
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = cr(T::zero());
        }
    }
    Ok(Schur { t: h, z })
}

fn wilkinson<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = T::of(0.5);
    let tr = (a + d) * half;
    let disc = ((a - d) * half) * ((a - d) * half) + b * c;
    let sq = disc.sqrt();
    let l1 = tr + sq;
    let l2 = tr - sq;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues and eigenvectors of a general complex matrix.
pub fn eig<T: Real>(m: &Matrix<T>) -> Result<EigenResult<T>, NumError> {
    let Schur { t, z } = schur(m)?;
    let n = t.rows();
    let values: Vec<C<T>> = (0..n).map(|i| t[(i, i)]).collect();
    let small = T::epsilon() * t.norm_fro().max(T::min_positive_value());
    let mut y = Matrix::zeros(n, n);
    for k in 0..n {
        let lk = values[k];
        let mut col = vec![cr(T::zero()); n];
        col[k] = cr(T::one());
        for j in (0..k).rev() {
            let mut s = cr(T::zero());
            for i in j + 1..=k {
                s += t[(j, i)] * col[i];
            }
            let mut den = t[(j, j)] - lk;
            if den.norm() < small {
                den = cr(small);
            }
            col[j] = -s / den;
            let big = col[j].norm();
            if big > T::of(1e100) {
                // keep defective cases finite; only the direction matters
                for z in col.iter_mut() {
                    *z = *z / big;
                }
            }
        }
        let v = z.matvec(&crate::numkit::Vector::from_vec(col)).expect("shapes agree");
        let nv = v.norm2();
        let v = v.scale_real(T::one() / nv);
        y.set_column(k, &v);
    }
    if !y.is_finite() {
        return Err(NumError::NoConvergence("eigenvector back-substitution"));
    }
    Ok(EigenResult { values, vectors: y })
}

/// Eigenvalues of a general complex matrix.
pub fn eigvals<T: Real>(m: &Matrix<T>) -> Result<Vec<C<T>>, NumError> {
    let s = schur(m)?;
    Ok((0..s.t.rows()).map(|i| s.t[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_eigenvalues() {
        let m = Matrix::<f64>::from_real_diag(&[2.0, 3.0]);
        let mut v: Vec<f64> = eig(&m).unwrap().values.iter().map(|z| z.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(v, vec![2.0, 3.0]);
    }

    #[test]
    fn rotation_has_complex_pair() {
        let m = Matrix::<f64>::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = eig(&m).unwrap();
        for z in &ev.values {
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!(z.re.abs() < 1e-14);
        }
        assert!(ev.max_residual(&m) < 1e-14);
    }

    #[test]
    fn schur_reconstructs() {
        let n = 9;
        let m = Matrix::<f64>::from_fn(n, n, |i, j| C::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + j) % 3) as f64));
        let s = schur(&m).unwrap();
        let back = &(&s.z * &s.t) * &s.z.adjoint();
        assert!(back.max_abs_diff(&m) < 1e-12 * m.norm_fro());
        let ev = eig(&m).unwrap();
        assert!(ev.max_residual(&m) < 1e-12);
    }

    #[test]
    fn companion_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = Matrix::<f64>::from_real_rows(&[&[6.0, -11.0, 6.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let mut v: Vec<f64> = eigvals(&m).unwrap().iter().map(|z| z.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in v.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
