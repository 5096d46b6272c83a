use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::numkit::NumError;
use crate::scalar::{cr, Real, C};

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector<T: Real> {
    data: Vec<C<T>>,
}

fn all_finite<T: Real>(xs: &[C<T>]) -> bool {
    xs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl<T: Real> Matrix<T> {
    /// Checked constructor: length must match and entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self, NumError> {
        if rows * cols != data.len() {
            return Err(NumError::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !all_finite(&data) {
            return Err(NumError::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<C<T>>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cr(T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a complex matrix from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        Self::from_fn(r, cols, |i, j| cr(T::of(rows[i][j])))
    }

    pub fn from_diag(d: &[C<T>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let d: Vec<C<T>> = d.iter().map(|&x| cr(T::of(x))).collect();
        Self::from_diag(&d)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector<T> {
        Vector::from_vec((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn set_column(&mut self, j: usize, v: &Vector<T>) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn diagonal(&self) -> Vector<T> {
        Vector::from_vec((0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect())
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|&z| z * s).collect())
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cr(s))
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|&z| f(z)).collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, NumError> {
        if self.cols != other.rows {
            return Err(NumError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &Vector<T>) -> Result<Vector<T>, NumError> {
        if self.cols != v.len() {
            return Err(NumError::Shape(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(Vector::from_vec(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v.as_slice()).map(|(&a, &b)| a * b).sum())
                .collect(),
        ))
    }

    /// `self† · v` without forming the adjoint.
    pub fn adjoint_matvec(&self, v: &Vector<T>) -> Result<Vector<T>, NumError> {
        if self.rows != v.len() {
            return Err(NumError::Shape(format!(
                "cannot apply adjoint of {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![cr(T::zero()); self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        Ok(Vector::from_vec(out))
    }

    /// `self† · self`.
    pub fn gram(&self) -> Self {
        self.adjoint().matmul(self).expect("shapes agree")
    }

    pub fn norm_fro(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Number of nonzeros in the densest row or column.
    pub fn sparsity(&self) -> usize {
        let row_max = (0..self.rows)
            .map(|i| self.row(i).iter().filter(|z| z.norm_sqr() > T::zero()).count())
            .max()
            .unwrap_or(0);
        let col_max = (0..self.cols)
            .map(|j| (0..self.rows).filter(|&i| self[(i, j)].norm_sqr() > T::zero()).count())
            .max()
            .unwrap_or(0);
        row_max.max(col_max)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|z| z.norm_sqr() > T::zero()).count()
    }

    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        let half = T::of(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut d = T::zero();
        for i in 0..self.rows {
            for j in 0..=i {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "submatrix out of range");
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Assembles a matrix from a grid of blocks; `None` means a zero block.
    pub fn from_blocks(blocks: &[Vec<Option<&Self>>]) -> Result<Self, NumError> {
        let br = blocks.len();
        let bc = blocks.first().map_or(0, Vec::len);
        let mut heights = vec![None; br];
        let mut widths = vec![None; bc];
        for (i, row) in blocks.iter().enumerate() {
            if row.len() != bc {
                return Err(NumError::Shape("ragged block grid".into()));
            }
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    for (slot, val) in [(&mut heights[i], b.rows), (&mut widths[j], b.cols)] {
                        match *slot {
                            None => *slot = Some(val),
                            Some(v) if v != val => {
                                return Err(NumError::Shape("inconsistent block sizes".into()))
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .map(|h| h.ok_or_else(|| NumError::Shape("block row has no sized block".into())))
            .collect::<Result<_, _>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .map(|w| w.ok_or_else(|| NumError::Shape("block column has no sized block".into())))
            .collect::<Result<_, _>>()?;
        let mut out = Self::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (i, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    out.set_submatrix(r0, c0, b);
                }
                c0 += widths[j];
            }
            r0 += heights[i];
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        Matrix::from_vec_unchecked(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        )
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        Matrix::from_vec_unchecked(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        )
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

impl<T: Real> Mul<&Vector<T>> for &Matrix<T> {
    type Output = Vector<T>;
    fn mul(self, rhs: &Vector<T>) -> Vector<T> {
        self.matvec(rhs).expect("shape mismatch in matvec")
    }
}

impl<T: Real> Vector<T> {
    /// Checked constructor: entries must be finite.
    pub fn new(data: Vec<C<T>>) -> Result<Self, NumError> {
        if !all_finite(&data) {
            return Err(NumError::NonFinite("vector entries"));
        }
        Ok(Self { data })
    }

    pub(crate) fn from_vec(data: Vec<C<T>>) -> Self {
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![cr(T::zero()); n] }
    }

    pub fn from_real(xs: &[f64]) -> Self {
        Self { data: xs.iter().map(|&x| cr(T::of(x))).collect() }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> C<T>) -> Self {
        Self { data: (0..n).map(f).collect() }
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v[k] = cr(T::one());
        v
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C<T>> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C<T>> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn norm2(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn norm_inf(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn norm_one(&self) -> T {
        self.data.iter().map(|z| z.norm()).sum()
    }

    /// Hermitian inner product `self† · other`.
    pub fn dot(&self, other: &Self) -> C<T> {
        assert_eq!(self.len(), other.len());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cr(s))
    }

    /// `self += s · x`.
    pub fn axpy(&mut self, s: C<T>, x: &Self) {
        assert_eq!(self.len(), x.len());
        for (a, &b) in self.data.iter_mut().zip(&x.data) {
            *a += s * b;
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self { data: self.data[start..start + len].to_vec() }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { data }
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self { data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len());
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }

    /// `‖self − reference‖∞ / ‖reference‖∞`.
    pub fn rel_max_err(&self, reference: &Self) -> T {
        let d = self.max_abs_diff(reference);
        let r = reference.norm_inf();
        if r > T::zero() {
            d / r
        } else {
            d
        }
    }

    /// `‖self − reference‖₂ / ‖reference‖₂`.
    pub fn rel_err2(&self, reference: &Self) -> T {
        let d = (self - reference).norm2();
        let r = reference.norm2();
        if r > T::zero() {
            d / r
        } else {
            d
        }
    }
}

impl<T: Real> Index<usize> for Vector<T> {
    type Output = C<T>;
    fn index(&self, i: usize) -> &C<T> {
        &self.data[i]
    }
}

impl<T: Real> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut C<T> {
        &mut self.data[i]
    }
}

impl<T: Real> Add for &Vector<T> {
    type Output = Vector<T>;
    fn add(self, rhs: Self) -> Vector<T> {
        assert_eq!(self.len(), rhs.len(), "length mismatch in add");
        Vector::from_vec(self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect())
    }
}

impl<T: Real> Sub for &Vector<T> {
    type Output = Vector<T>;
    fn sub(self, rhs: Self) -> Vector<T> {
        assert_eq!(self.len(), rhs.len(), "length mismatch in sub");
        Vector::from_vec(self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect())
    }
}

impl<T: Real> Neg for &Vector<T> {
    type Output = Vector<T>;
    fn neg(self) -> Vector<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> FromIterator<C<T>> for Vector<T> {
    fn from_iter<I: IntoIterator<Item = C<T>>>(iter: I) -> Self {
        Self { data: iter.into_iter().collect() }
    }
}

/// Kronecker product.
pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = Matrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s.norm_sqr() == T::zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

impl<T: Real> serde::Serialize for Vector<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for z in self.iter() {
            seq.serialize_element(&(z.re, z.im))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    #[test]
    fn kron_identity() {
        let k = kron(&M::identity(2), &M::identity(2));
        assert_eq!(k, M::identity(4));
    }

    #[test]
    fn kron_permutation_structure() {
        let x = M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let k = kron(&x, &M::identity(2));
        let expect = M::from_blocks(&[
            vec![None, Some(&M::identity(2))],
            vec![Some(&M::identity(2)), None],
        ])
        .unwrap();
        assert_eq!(k, expect);
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let a = M::from_real_rows(&[&[1.0, 2.0, 3.0]]);
        let b = M::from_real_rows(&[&[1.0], &[-1.0]]);
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (2, 3));
        assert_eq!(k[(1, 2)].re, -3.0);
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(M::new(2, 2, vec![cr(1.0); 3]).is_err());
        assert!(M::new(1, 1, vec![cr(f64::NAN)]).is_err());
        assert!(Vector::<f64>::new(vec![cr(f64::INFINITY)]).is_err());
    }

    #[test]
    fn adjoint_matvec_matches_explicit() {
        let a = M::from_fn(3, 2, |i, j| C::new(i as f64 + 1.0, j as f64 - 0.5));
        let v = Vector::from_fn(3, |i| C::new(1.0, i as f64));
        let lhs = a.adjoint_matvec(&v).unwrap();
        let rhs = &a.adjoint() * &v;
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn sparsity_counts_densest_line() {
        let a = M::from_real_rows(&[&[1.0, 0.0, 2.0], &[0.0, 0.0, 3.0], &[0.0, 0.0, 4.0]]);
        assert_eq!(a.sparsity(), 3);
        assert_eq!(a.nnz(), 4);
    }
}
