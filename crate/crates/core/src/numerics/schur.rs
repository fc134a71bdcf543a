//! Real Schur decomposition by Householder Hessenberg reduction followed by
//! the Francis implicit double-shift QR iteration.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// `A = Z T Zᵀ` with `Z` orthogonal and `T` upper quasi-triangular.
///
/// Diagonal blocks of `T` are 1x1 (real eigenvalues) or 2x2 with a complex
/// conjugate eigenvalue pair. Real pairs are always split into 1x1 blocks.
#[derive(Debug, Clone)]
pub struct RealSchur<T> {
    pub t: DenseMatrix<T>,
    pub z: DenseMatrix<T>,
}

impl<T: Scalar> RealSchur<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "Schur form of non-square {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let (mut h, mut z) = hessenberg(a);
        francis(&mut h, &mut z)?;
        Ok(Self { t: h, z })
    }

    /// Size of the diagonal block starting at `k` (1 or 2).
    pub fn block_size(&self, k: usize) -> usize {
        let n = self.t.rows();
        if k + 1 < n && self.t[(k + 1, k)] != T::zero() {
            2
        } else {
            1
        }
    }

    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        let n = self.t.rows();
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        while k < n {
            if self.block_size(k) == 1 {
                out.push(Complex::new(self.t[(k, k)], T::zero()));
                k += 1;
            } else {
                let (l1, l2) = eig2(
                    self.t[(k, k)],
                    self.t[(k, k + 1)],
                    self.t[(k + 1, k)],
                    self.t[(k + 1, k + 1)],
                );
                out.push(l1);
                out.push(l2);
                k += 2;
            }
        }
        out
    }
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<Complex<T>>> {
    Ok(RealSchur::new(a)?.eigenvalues())
}

fn eig2<T: Scalar>(a: T, b: T, c: T, d: T) -> (Complex<T>, Complex<T>) {
    let half = T::c(0.5);
    let p = half * (a - d);
    let disc = p * p + b * c;
    let mid = half * (a + d);
    if disc >= T::zero() {
        let s = disc.sqrt();
        // avoid cancellation: larger-magnitude root first, then product rule
        let r1 = mid + if mid >= T::zero() { s } else { -s };
        let det = a * d - b * c;
        let r2 = if r1 != T::zero() { det / r1 } else { mid - s };
        (Complex::new(r1, T::zero()), Complex::new(r2, T::zero()))
    } else {
        let s = (-disc).sqrt();
        (Complex::new(mid, s), Complex::new(mid, -s))
    }
}

fn householder<T: Scalar>(x: &[T]) -> Option<(Vec<T>, T)> {
    // returns (v, beta) with (I - beta v vᵀ) x = ∓‖x‖ e1
    let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm == T::zero() {
        return None;
    }
    let alpha = if x[0] >= T::zero() { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm2: T = v.iter().map(|&e| e * e).sum();
    if vnorm2 == T::zero() {
        return None;
    }
    Some((v, T::c(2.0) / vnorm2))
}

fn apply_left<T: Scalar>(h: &mut DenseMatrix<T>, v: &[T], beta: T, r0: usize, cols: std::ops::Range<usize>) {
    for j in cols {
        let mut s = T::zero();
        for (k, &vk) in v.iter().enumerate() {
            s += vk * h[(r0 + k, j)];
        }
        s *= beta;
        for (k, &vk) in v.iter().enumerate() {
            h[(r0 + k, j)] -= s * vk;
        }
    }
}

fn apply_right<T: Scalar>(h: &mut DenseMatrix<T>, v: &[T], beta: T, c0: usize, rows: std::ops::Range<usize>) {
    for i in rows {
        let mut s = T::zero();
        for (k, &vk) in v.iter().enumerate() {
            s += h[(i, c0 + k)] * vk;
        }
        s *= beta;
        for (k, &vk) in v.iter().enumerate() {
            h[(i, c0 + k)] -= s * vk;
        }
    }
}

fn hessenberg<T: Scalar>(a: &DenseMatrix<T>) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = DenseMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<T> = (k + 1..n).map(|i| h[(i, k)]).collect();
        if let Some((v, beta)) = householder(&x) {
            apply_left(&mut h, &v, beta, k + 1, 0..n);
            apply_right(&mut h, &v, beta, k + 1, 0..n);
            apply_right(&mut z, &v, beta, k + 1, 0..n);
            for i in k + 2..n {
                h[(i, k)] = T::zero();
            }
        }
    }
    (h, z)
}

fn givens<T: Scalar>(a: T, b: T) -> (T, T) {
    // (c, s) with [c s; -s c]ᵀ-style rotation zeroing b against a
    if b == T::zero() {
        return (T::one(), T::zero());
    }
    let r = a.hypot(b);
    (a / r, b / r)
}

/// Applies the rotation `G = [[c, -s], [s, c]]` acting on indices (p, p+1):
/// rows get `Gᵀ`, columns get `G`.
fn rotate<T: Scalar>(h: &mut DenseMatrix<T>, z: &mut DenseMatrix<T>, p: usize, c: T, s: T) {
    let n = h.rows();
    for j in 0..n {
        let x = h[(p, j)];
        let y = h[(p + 1, j)];
        h[(p, j)] = c * x + s * y;
        h[(p + 1, j)] = -s * x + c * y;
    }
    for i in 0..n {
        let x = h[(i, p)];
        let y = h[(i, p + 1)];
        h[(i, p)] = c * x + s * y;
        h[(i, p + 1)] = -s * x + c * y;
    }
    for i in 0..n {
        let x = z[(i, p)];
        let y = z[(i, p + 1)];
        z[(i, p)] = c * x + s * y;
        z[(i, p + 1)] = -s * x + c * y;
    }
}

/// Splits a 2x2 diagonal block with real eigenvalues into two 1x1 blocks.
fn standardize_block<T: Scalar>(h: &mut DenseMatrix<T>, z: &mut DenseMatrix<T>, p: usize) {
    let (a, b, c, d) = (h[(p, p)], h[(p, p + 1)], h[(p + 1, p)], h[(p + 1, p + 1)]);
    if c == T::zero() {
        return;
    }
    let half = T::c(0.5);
    let q = half * (a - d);
    let disc = q * q + b * c;
    if disc < T::zero() {
        return;
    }
    let s = disc.sqrt();
    let mid = half * (a + d);
    let lambda = mid + if q >= T::zero() { s } else { -s };
    // eigenvector for lambda, choosing the better-conditioned of two forms
    let v1 = (b, lambda - a);
    let v2 = (lambda - d, c);
    let (x, y) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
    let r = x.hypot(y);
    if r == T::zero() {
        return;
    }
    rotate(h, z, p, x / r, y / r);
    h[(p + 1, p)] = T::zero();
}

fn francis<T: Scalar>(h: &mut DenseMatrix<T>, z: &mut DenseMatrix<T>) -> Result<()> {
    let n = h.rows();
    if n == 0 {
        return Ok(());
    }
    let eps = T::epsilon();
    let norm = h.max_abs();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            break;
        }
        // locate the active unreduced window [l, hi]
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            let s = if s == T::zero() { norm } else { s };
            if h[(l, l - 1)].abs() <= eps * s {
                h[(l, l - 1)] = T::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        if l + 1 == hi {
            standardize_block(h, z, l);
            if hi < 2 {
                break;
            }
            hi -= 2;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > MAX_SWEEPS_PER_EIGENVALUE * n {
            return Err(Error::NoConvergence {
                what: "Francis QR iteration",
                iterations: total,
                residual: h[(hi, hi - 1)].abs().as_f64(),
            });
        }
        let (mut sum, mut prod) = {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            (a + d, a * d - b * c)
        };
        if iter % 11 == 10 {
            // exceptional shift
            let w = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            sum = T::c(1.5) * w + h[(hi, hi)];
            prod = w * w;
        }
        let mut x = h[(l, l)] * h[(l, l)] + h[(l, l + 1)] * h[(l + 1, l)] - sum * h[(l, l)] + prod;
        let mut y = h[(l + 1, l)] * (h[(l, l)] + h[(l + 1, l + 1)] - sum);
        let mut zz = h[(l + 1, l)] * h[(l + 2, l + 1)];
        for k in l..hi - 1 {
            if let Some((v, beta)) = householder(&[x, y, zz]) {
                let c0 = if k > l { k - 1 } else { l };
                apply_left(h, &v, beta, k, c0..n);
                let r1 = (k + 3).min(hi);
                apply_right(h, &v, beta, k, 0..r1 + 1);
                apply_right(z, &v, beta, k, 0..n);
            }
            x = h[(k + 1, k)];
            y = h[(k + 2, k)];
            if k + 3 <= hi {
                zz = h[(k + 3, k)];
            }
            if k > l {
                h[(k + 2, k - 1)] = T::zero();
                h[(k + 1, k - 1)] = T::zero();
            }
        }
        let (c, s) = givens(x, y);
        // rotation zeroing y against x, applied to rows hi-1, hi
        rotate(h, z, hi - 1, c, s);
        h[(hi, hi - 2)] = T::zero();
        if hi >= 3 {
            h[(hi - 1, hi - 3)] = T::zero();
        }
    }
    // clean below the first subdiagonal
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = T::zero();
        }
    }
    Ok(())
}
