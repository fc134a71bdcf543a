use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "LU of non-square {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = T::epsilon() * a.max_abs() * T::c(n.max(1) as f64) * T::c(1e-3);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny || pmax == T::zero() {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            lu.swap_rows(k, p);
            perm.swap(k, p);
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A x = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(b.rows(), self.dim());
        let mut out = DenseMatrix::zeros(b.rows(), b.cols());
        let mut col = vec![T::zero(); b.rows()];
        for j in 0..b.cols() {
            for (i, c) in col.iter_mut().enumerate() {
                *c = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for (i, xi) in x.into_iter().enumerate() {
                out[(i, j)] = xi;
            }
        }
        out
    }

    pub fn determinant(&self) -> T {
        let n = self.dim();
        let mut det = T::one();
        let mut visited = vec![false; n];
        // permutation parity from cycle decomposition
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !visited[j] {
                visited[j] = true;
                j = self.perm[j];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        for i in 0..n {
            det *= self.lu[(i, i)];
        }
        det
    }
}

/// `A^{-1} B`.
pub fn solve<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(Lu::new(a)?.solve(b))
}

/// `B A^{-1}`.
pub fn solve_right<T: Scalar>(b: &DenseMatrix<T>, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(Lu::new(&a.transpose())?.solve(&b.transpose()).transpose())
}

/// Row vector `v A^{-1}`.
pub fn solve_left_vec<T: Scalar>(v: &[T], a: &DenseMatrix<T>) -> Result<Vec<T>> {
    Ok(Lu::new(&a.transpose())?.solve_vec(v))
}

pub fn inverse<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(Lu::new(a)?.solve(&DenseMatrix::identity(a.rows())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_inverts() {
        let a = DenseMatrix::<f64>::from_f64_rows(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let inv = inverse(&a).unwrap();
        let id = &a * &inv;
        assert!((id - DenseMatrix::identity(3)).max_abs() < 1e-14);
        let lu = Lu::new(&a).unwrap();
        // det = 0*(1) - 2*(1-0) + 1*(0-3) = -5
        assert!((lu.determinant() + 5.0).abs() < 1e-13);
        let b = DenseMatrix::from_f64_rows(&[&[1.0], &[2.0], &[3.0]]);
        let x = solve_right(&b.transpose(), &a).unwrap();
        assert!((&x * &a - b.transpose()).max_abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::<f64>::from_f64_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(Lu::new(&a), Err(Error::Singular(_))));
        let z = DenseMatrix::<f64>::zeros(2, 2);
        assert!(Lu::new(&z).is_err());
    }
}
