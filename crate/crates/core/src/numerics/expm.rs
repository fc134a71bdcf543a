//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13), following Higham's 2005 selection thresholds.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::numerics::lu;
use crate::scalar::Scalar;

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
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

// 1-norm bounds below which the degree-m approximant meets unit roundoff.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn norm_one<T: Scalar>(a: &DenseMatrix<T>) -> T {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].abs()).sum::<T>())
        .fold(T::zero(), T::max)
}

fn lincomb<T: Scalar>(terms: &[(f64, &DenseMatrix<T>)], n: usize) -> DenseMatrix<T> {
    let mut out = DenseMatrix::zeros(n, n);
    for &(c, m) in terms {
        out = out + m.scale(T::c(c));
    }
    out
}

fn pade_low<T: Scalar>(a: &DenseMatrix<T>, b: &[f64]) -> Result<DenseMatrix<T>> {
    let n = a.rows();
    let id = DenseMatrix::identity(n);
    let a2 = a * a;
    let mut pow = id.clone();
    let mut u_inner = DenseMatrix::zeros(n, n);
    let mut v = DenseMatrix::zeros(n, n);
    for k in (0..b.len()).step_by(2) {
        v = v + pow.scale(T::c(b[k]));
        if k + 1 < b.len() {
            u_inner = u_inner + pow.scale(T::c(b[k + 1]));
        }
        pow = &pow * &a2;
    }
    let u = a * &u_inner;
    lu::solve(&(&v - &u), &(&v + &u))
}

fn pade13<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = a.rows();
    let b = &PADE13;
    let id = DenseMatrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let u_lo = lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)], n);
    let u = a * &(&a6 * &u_hi + u_lo);
    let v_hi = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let v_lo = lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)], n);
    let v = &a6 * &v_hi + v_lo;
    lu::solve(&(&v - &u), &(&v + &u))
}

/// Matrix exponential `e^A`.
pub fn expm<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expm of non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("expm of non-finite matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let norm = norm_one(a);
    for &(m, theta) in &THETA {
        if norm <= T::c(theta) {
            let b: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, b);
        }
    }
    let ratio = (norm / T::c(THETA13)).as_f64();
    let s = if ratio > 1.0 { ratio.log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(T::c(2f64.powi(-s)));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gives_identity() {
        let e = expm(&DenseMatrix::<f64>::zeros(3, 3)).unwrap();
        assert!((e - DenseMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_case() {
        let e = expm(&DenseMatrix::<f64>::from_diag(&[-1.0, 2.0])).unwrap();
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - 2f64.exp()).abs() < 1e-14 * 2f64.exp());
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn symmetric_generator_closed_form() {
        let q = DenseMatrix::<f64>::from_f64_rows(&[&[-1.0, 1.0], &[1.0, -1.0]]);
        let e = expm(&q).unwrap();
        let em2 = (-2f64).exp();
        let expected = DenseMatrix::from_f64_rows(&[
            &[0.5 * (1.0 + em2), 0.5 * (1.0 - em2)],
            &[0.5 * (1.0 - em2), 0.5 * (1.0 + em2)],
        ]);
        assert!((e - expected).max_abs() < 1e-15);
    }

    #[test]
    fn all_pade_degrees_agree_with_taylor() {
        // A nilpotent-plus-scalar matrix has a closed-form exponential.
        for &a in &[1e-3, 0.1, 0.5, 1.5, 4.0, 40.0] {
            let m = DenseMatrix::<f64>::from_f64_rows(&[&[-a, a], &[0.0, -a]]);
            let e = expm(&m).unwrap();
            let ea = (-a).exp();
            assert!((e[(0, 0)] - ea).abs() < 1e-14);
            assert!((e[(0, 1)] - a * ea).abs() < 1e-13 * (1.0 + a * ea));
            assert!(e[(1, 0)].abs() < 1e-16);
        }
    }

    #[test]
    fn rotation() {
        let m = DenseMatrix::<f64>::from_f64_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let e = expm(&m).unwrap();
        assert!((e[(0, 0)] - 1f64.cos()).abs() < 1e-15);
        assert!((e[(0, 1)] - 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn works_in_f32() {
        let e = expm(&DenseMatrix::<f32>::from_diag(&[1.0, -3.0])).unwrap();
        assert!((e[(0, 0)] - 1f32.exp()).abs() < 1e-5);
    }

    #[test]
    fn rejects_non_square() {
        assert!(expm(&DenseMatrix::<f64>::zeros(2, 3)).is_err());
    }
}
