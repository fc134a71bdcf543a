use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::numerics::lu::Lu;
use crate::numerics::schur::RealSchur;
use crate::scalar::Scalar;

/// Solves the Sylvester equation `A X + X B = C`.
///
/// `B` is reduced to real Schur form `B = W R Wᵀ`; the transformed unknown
/// `Y = X W` is then obtained one column (or one 2-column block for complex
/// pairs of `R`) at a time by dense solves with shifted copies of `A`.
pub fn sylvester<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    let (m, n) = (a.rows(), b.rows());
    if !a.is_square() || !b.is_square() || c.rows() != m || c.cols() != n {
        return Err(Error::Dimension(format!(
            "Sylvester shapes A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let schur = RealSchur::new(b)?;
    let r = &schur.t;
    let f = c * &schur.z;
    let mut y = DenseMatrix::<T>::zeros(m, n);
    let mut k = 0;
    while k < n {
        let rhs_col = |col: usize, y: &DenseMatrix<T>| -> Vec<T> {
            (0..m)
                .map(|i| {
                    let mut s = f[(i, col)];
                    for j in 0..k {
                        s -= y[(i, j)] * r[(j, col)];
                    }
                    s
                })
                .collect()
        };
        if schur.block_size(k) == 1 {
            let rhs = rhs_col(k, &y);
            let lu = Lu::new(&a.add_diag(r[(k, k)]))
                .map_err(|_| Error::Singular("Sylvester operator (A, -B share an eigenvalue)".into()))?;
            let x = lu.solve_vec(&rhs);
            for (i, xi) in x.into_iter().enumerate() {
                y[(i, k)] = xi;
            }
            k += 1;
        } else {
            let mut rhs = rhs_col(k, &y);
            rhs.extend(rhs_col(k + 1, &y));
            let mut big = DenseMatrix::zeros(2 * m, 2 * m);
            big.set_block(0, 0, &a.add_diag(r[(k, k)]));
            big.set_block(m, m, &a.add_diag(r[(k + 1, k + 1)]));
            for i in 0..m {
                big[(i, m + i)] = r[(k + 1, k)];
                big[(m + i, i)] = r[(k, k + 1)];
            }
            let lu = Lu::new(&big)
                .map_err(|_| Error::Singular("Sylvester operator (A, -B share an eigenvalue)".into()))?;
            let x = lu.solve_vec(&rhs);
            for i in 0..m {
                y[(i, k)] = x[i];
                y[(i, k + 1)] = x[m + i];
            }
            k += 2;
        }
    }
    Ok(&y * &schur.z.transpose())
}
