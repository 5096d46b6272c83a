//! Fixed-size Hermitian eigensolver on stack arrays for the many tiny
//! per-mode problems of the blocked Schrödinger evolution.

use crate::scalar::{cr, Real, C};

pub type SmallMat<T, const N: usize> = [[C<T>; N]; N];

pub fn small_identity<T: Real, const N: usize>() -> SmallMat<T, N> {
    let mut m = [[cr(T::zero()); N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = cr(T::one());
    }
    m
}

fn off_norm<T: Real, const N: usize>(a: &SmallMat<T, N>) -> T {
    let mut s = T::zero();
    for p in 0..N {
        for q in p + 1..N {
            s += a[p][q].norm_sqr();
        }
    }
    s
}

/// Cyclic complex Jacobi. Returns eigenvalues (unsorted) and eigenvectors as
/// columns of the second array. `start` seeds the eigenvector basis; a basis
/// close to the answer converges in one or two sweeps.
pub fn small_eigh<T: Real, const N: usize>(
    h: &SmallMat<T, N>,
    start: Option<&SmallMat<T, N>>,
) -> ([T; N], SmallMat<T, N>) {
    let mut v = match start {
        Some(s) => *s,
        None => small_identity(),
    };
    let mut a = *h;
    if start.is_some() {
        // a = V† h V
        let mut hv = [[cr(T::zero()); N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut s = cr(T::zero());
                for k in 0..N {
                    s += h[i][k] * v[k][j];
                }
                hv[i][j] = s;
            }
        }
        for i in 0..N {
            for j in 0..N {
                let mut s = cr(T::zero());
                for k in 0..N {
                    s += v[k][i].conj() * hv[k][j];
                }
                a[i][j] = s;
            }
        }
    }
    let mut diag_norm = T::zero();
    for (i, row) in a.iter().enumerate() {
        diag_norm += row[i].norm_sqr();
    }
    let total = diag_norm + T::of(2.0) * off_norm(&a);
    let thresh = T::epsilon() * T::epsilon() * total.max(T::min_positive_value());
    for _sweep in 0..30 {
        if off_norm(&a) <= thresh {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                let g = apq.norm();
                if g == T::zero() {
                    continue;
                }
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let phase = apq / g;
                let theta = (aqq - app) / (T::of(2.0) * g);
                let t = if theta >= T::zero() {
                    T::one() / (theta + (T::one() + theta * theta).sqrt())
                } else {
                    -T::one() / (-theta + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let gpq = phase * s;
                let gqp = -phase.conj() * s;
                let cc = cr(c);
                // a ← a G on columns p, q
                for row in a.iter_mut() {
                    let x = row[p];
                    let y = row[q];
                    row[p] = x * cc + y * gqp;
                    row[q] = x * gpq + y * cc;
                }
                // a ← G† a on rows p, q
                for k in 0..N {
                    let x = a[p][k];
                    let y = a[q][k];
                    a[p][k] = cc * x + gqp.conj() * y;
                    a[q][k] = gpq.conj() * x + cc * y;
                }
                a[p][q] = cr(T::zero());
                a[q][p] = cr(T::zero());
                for row in v.iter_mut() {
                    let x = row[p];
                    let y = row[q];
                    row[p] = x * cc + y * gqp;
                    row[q] = x * gpq + y * cc;
                }
            }
        }
    }
    let mut vals = [T::zero(); N];
    for (i, val) in vals.iter_mut().enumerate() {
        *val = a[i][i].re;
    }
    (vals, v)
}

/// `e^{−i h t} x` for a small Hermitian `h` given its eigendecomposition.
pub fn small_unitary_apply<T: Real, const N: usize>(
    vals: &[T; N],
    vecs: &SmallMat<T, N>,
    t: T,
    x: &[C<T>; N],
) -> [C<T>; N] {
    let mut y = [cr(T::zero()); N];
    for k in 0..N {
        let mut s = cr(T::zero());
        for i in 0..N {
            s += vecs[i][k].conj() * x[i];
        }
        let ph = -vals[k] * t;
        y[k] = s * C::new(ph.cos(), ph.sin());
    }
    let mut out = [cr(T::zero()); N];
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = cr(T::zero());
        for k in 0..N {
            s += vecs[i][k] * y[k];
        }
        *o = s;
    }
    out
}
