use crate::numkit::{Lu, Matrix, NumError, Vector};
use crate::scalar::{cr, Real};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by Padé-13 scaling and squaring.
pub fn expm<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>, NumError> {
    if !a.is_square() {
        return Err(NumError::Shape(format!("expm needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(NumError::NonFinite("expm argument"));
    }
    let n = a.rows();
    let norm = a.norm_one();
    if norm == T::zero() {
        return Ok(Matrix::identity(n));
    }
    let ratio = norm.to_f64_lossy() / THETA13;
    let s = if ratio > 1.0 { ratio.log2().ceil() as i32 } else { 0 };
    let a = a.scale_real(T::of(2f64.powi(-s)));
    let b: Vec<T> = PADE13.iter().map(|&x| T::of(x)).collect();
    let id = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: T, c4: T, c2: T, c0: T| -> Matrix<T> {
        let mut m = a6.scale_real(c6);
        m = &m + &a4.scale_real(c4);
        m = &m + &a2.scale_real(c2);
        &m + &id.scale_real(c0)
    };
    let u_inner = &a6 * &(&(&a6.scale_real(b[13]) + &a4.scale_real(b[11])) + &a2.scale_real(b[9]));
    let u = &a * &(&u_inner + &lin(b[7], b[5], b[3], b[1]));
    let v_inner = &a6 * &(&(&a6.scale_real(b[12]) + &a4.scale_real(b[10])) + &a2.scale_real(b[8]));
    let v = &v_inner + &lin(b[6], b[4], b[2], b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = Lu::factor(&q)?.solve_matrix(&p)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(NumError::NonFinite("expm result"));
    }
    Ok(r)
}

/// `e^{m·t} · v`.
pub fn expm_apply<T: Real>(m: &Matrix<T>, v: &Vector<T>, t: T) -> Result<Vector<T>, NumError> {
    if !m.is_square() || m.cols() != v.len() {
        return Err(NumError::Shape(format!(
            "expm_apply: {}x{} generator with vector of length {}",
            m.rows(),
            m.cols(),
            v.len()
        )));
    }
    if !t.is_finite() {
        return Err(NumError::NonFinite("expm_apply time"));
    }
    if t == T::zero() {
        return Ok(v.clone());
    }
    expm(&m.scale(cr(t)))?.matvec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;

    #[test]
    fn zero_generator_is_identity() {
        let v = Vector::<f64>::from_real(&[1.0, -2.0]);
        let out = expm_apply(&Matrix::zeros(2, 2), &v, 3.0).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn scalar_decay() {
        let out = expm_apply(&Matrix::<f64>::from_real_diag(&[-1.0]), &Vector::from_real(&[1.0]), 1.0).unwrap();
        assert!((out[0].re - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn phase_rotation() {
        let m = Matrix::<f64>::from_diag(&[C::new(0.0, std::f64::consts::PI)]);
        let out = expm_apply(&m, &Vector::from_real(&[1.0]), 1.0).unwrap();
        assert!((out[0] - C::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn nilpotent_exact() {
        let m = Matrix::<f64>::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = expm(&m.scale_real(50.0)).unwrap();
        assert!(e.max_abs_diff(&Matrix::from_real_rows(&[&[1.0, 50.0], &[0.0, 1.0]])) < 1e-10);
    }

    #[test]
    fn rejects_bad_time() {
        let m = Matrix::<f64>::identity(1);
        assert!(expm_apply(&m, &Vector::from_real(&[1.0]), f64::NAN).is_err());
        assert!(expm_apply(&m, &Vector::from_real(&[1.0, 2.0]), 1.0).is_err());
    }
}
