use crate::numkit::{Matrix, NumError, Vector};
use crate::scalar::{cr, Real, C};

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu<T: Real> {
    lu: Matrix<T>,
    piv: Vec<usize>,
    norm_one: T,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self, NumError> {
        if !a.is_square() {
            return Err(NumError::Shape(format!("LU needs a square matrix, got {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let norm_one = a.norm_one();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == T::zero() {
                return Err(NumError::Singular { cond: f64::INFINITY });
            }
            if p != k {
                piv.swap(p, k);
                for j in 0..n {
                    let t = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = t;
                }
            }
            let d = lu[(k, k)];
            let (head, tail) = lu.as_mut_slice().split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            for i in 0..n - k - 1 {
                let row = &mut tail[i * n..(i + 1) * n];
                let l = row[k] / d;
                row[k] = l;
                if l.norm_sqr() == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= l * pivot_row[j];
                }
            }
        }
        Ok(Self { lu, piv, norm_one })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &Vector<T>) -> Result<Vector<T>, NumError> {
        let n = self.dim();
        if b.len() != n {
            return Err(NumError::Shape(format!("rhs length {} does not match {n}", b.len())));
        }
        let mut x: Vec<C<T>> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        Ok(Vector::from_vec(x))
    }

    /// Solves `A† x = b`.
    pub fn solve_adjoint(&self, b: &Vector<T>) -> Result<Vector<T>, NumError> {
        let n = self.dim();
        if b.len() != n {
            return Err(NumError::Shape(format!("rhs length {} does not match {n}", b.len())));
        }
        // A† = U† L† P, so solve U† y = b, L† z = y, x = Pᵀ z.
        let mut y: Vec<C<T>> = b.as_slice().to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![cr(T::zero()); n];
        for (k, &p) in self.piv.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(Vector::from_vec(x))
    }

    pub fn solve_matrix(&self, b: &Matrix<T>) -> Result<Matrix<T>, NumError> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_column(j, &self.solve(&b.column(j))?);
        }
        Ok(out)
    }

    /// Estimated 1-norm condition number (Hager's method).
    pub fn cond_estimate(&self) -> T {
        let n = self.dim();
        if n == 0 {
            return T::one();
        }
        let mut x = Vector::from_fn(n, |_| cr(T::one() / T::of_usize(n)));
        let mut est = T::zero();
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return T::infinity(),
            };
            est = y.norm_one();
            let xi = y.map(|z| {
                let r = z.norm();
                if r > T::zero() {
                    z / r
                } else {
                    cr(T::one())
                }
            });
            let z = match self.solve_adjoint(&xi) {
                Ok(z) => z,
                Err(_) => return T::infinity(),
            };
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, T::zero()), |acc, v| if v.1 > acc.1 { v } else { acc });
            if zmax <= z.dot(&x).re || j == last_j {
                break;
            }
            last_j = j;
            x = Vector::basis(n, j);
        }
        if !est.is_finite() {
            return T::infinity();
        }
        est * self.norm_one
    }

    pub fn determinant(&self) -> C<T> {
        let n = self.dim();
        let mut d = cr(T::one());
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        let mut perm = self.piv.clone();
        let mut sign = T::one();
        for i in 0..n {
            while perm[i] != i {
                let j = perm[i];
                perm.swap(i, j);
                sign = -sign;
            }
        }
        d * sign
    }
}

/// Inverse of a square matrix.
pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>, NumError> {
    Lu::factor(a)?.solve_matrix(&Matrix::identity(a.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = Matrix::<f64>::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve(&Vector::from_real(&[3.0, 5.0])).unwrap();
        assert!(x.max_abs_diff(&Vector::from_real(&[0.8, 1.4])) < 1e-14);
    }

    #[test]
    fn adjoint_solve_matches_explicit() {
        let a = Matrix::<f64>::from_fn(3, 3, |i, j| C::new((i * 3 + j) as f64 % 4.0 + 1.0, i as f64 - j as f64));
        let b = Vector::from_fn(3, |i| C::new(1.0, i as f64));
        let x = Lu::factor(&a).unwrap().solve_adjoint(&b).unwrap();
        let r = &(&a.adjoint() * &x) - &b;
        assert!(r.norm2() < 1e-12);
    }

    #[test]
    fn cond_estimate_diagonal() {
        let a = Matrix::<f64>::from_real_diag(&[10.0, 0.1]);
        let c = Lu::factor(&a).unwrap().cond_estimate();
        assert!((c - 100.0).abs() < 1e-9);
    }

    #[test]
    fn singular_reported() {
        let a = Matrix::<f64>::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(Lu::factor(&a), Err(NumError::Singular { .. })));
    }

    #[test]
    fn determinant_with_pivoting() {
        let a = Matrix::<f64>::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((Lu::factor(&a).unwrap().determinant().re + 1.0).abs() < 1e-15);
    }
}
