use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Relative threshold below which a pivot of the rank-revealing QR counts as zero.
pub const NULL_TOL: f64 = 1e-10;

/// Householder QR with column pivoting, `A P = Q R`. Returns `R` and the
/// column permutation.
fn pivoted_qr<T: Scalar>(a: &DenseMatrix<T>) -> (DenseMatrix<T>, Vec<usize>) {
    let (rows, cols) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    for k in 0..rows.min(cols) {
        let p = (k..cols)
            .map(|j| (j, (k..rows).map(|i| r[(i, j)] * r[(i, j)]).sum::<T>()))
            .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        if p != k {
            for i in 0..rows {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = tmp;
            }
            perm.swap(k, p);
        }
        let norm = (k..rows).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r[(k, k)] >= T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..rows).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let beta = T::c(2.0) / vnorm2;
        for j in k..cols {
            let s = beta * v.iter().enumerate().map(|(t, &vt)| vt * r[(k + t, j)]).sum::<T>();
            for (t, &vt) in v.iter().enumerate() {
                r[(k + t, j)] -= s * vt;
            }
        }
        for i in k + 1..rows {
            r[(i, k)] = T::zero();
        }
    }
    (r, perm)
}

/// Numerical dimension of the right null space of a square matrix.
pub fn null_dimension<T: Scalar>(a: &DenseMatrix<T>) -> usize {
    let (r, _) = pivoted_qr(a);
    let thr = T::c(NULL_TOL) * a.max_abs();
    let n = a.cols();
    n - (0..n.min(a.rows())).filter(|&k| r[(k, k)].abs() > thr).count()
}

/// Row vector `v` with `v A = 0`, for `A` with a one-dimensional left null space.
///
/// The result is scaled so that `v·1 = 1`; if the entries sum to (numerically)
/// zero it is scaled to unit max-norm instead. For an irreducible generator
/// this is its stationary distribution.
pub fn left_null_vector<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    left_null_vector_scaled(a, a.max_abs())
}

/// As [`left_null_vector`], with rank decided against `NULL_TOL · scale`
/// instead of the magnitude of `A` itself.
pub fn left_null_vector_scaled<T: Scalar>(a: &DenseMatrix<T>, scale: T) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "left null vector of non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::NullSpaceDimension { found: 0 });
    }
    let at = a.transpose();
    let (r, perm) = pivoted_qr(&at);
    let thr = T::c(NULL_TOL) * scale;
    let rank = (0..n).filter(|&k| r[(k, k)].abs() > thr).count();
    if rank != n - 1 {
        return Err(Error::NullSpaceDimension { found: n - rank });
    }
    // R11 y = -r12, x_perm = [y; 1]
    let mut y = vec![T::zero(); n];
    y[n - 1] = T::one();
    for i in (0..n - 1).rev() {
        let mut s = -r[(i, n - 1)];
        for j in i + 1..n - 1 {
            s -= r[(i, j)] * y[j];
        }
        y[i] = s / r[(i, i)];
    }
    let mut v = vec![T::zero(); n];
    for (k, &p) in perm.iter().enumerate() {
        v[p] = y[k];
    }
    let sum: T = v.iter().copied().sum();
    let maxabs = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let scale = if sum.abs() > T::c(1e-8) * maxabs { sum } else { maxabs };
    Ok(v.into_iter().map(|x| x / scale).collect())
}
