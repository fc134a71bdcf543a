//! Dense kernels shared by the solvers: linear solves, matrix exponential,
//! eigenvalues, null vectors, Sylvester equations and quadrature.

mod expm;
mod lu;
mod nullspace;
mod quadrature;
mod schur;
mod sylvester;

pub use expm::expm;
pub use lu::{inverse, solve, solve_left_vec, solve_right, Lu};
pub use nullspace::{left_null_vector, left_null_vector_scaled, null_dimension, NULL_TOL};
pub use quadrature::quadrature;
pub use schur::{eigenvalues, RealSchur};
pub use sylvester::sylvester;

use num_complex::Complex;

use crate::scalar::Scalar;

/// Eigenvalue counts relative to the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfPlaneCounts {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Classifies eigenvalues by the sign of their real part; `|λ| <= tol` counts as zero.
pub fn half_plane_counts<T: Scalar>(eigs: &[Complex<T>], tol: T) -> HalfPlaneCounts {
    let mut c = HalfPlaneCounts {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    for l in eigs {
        if l.norm() <= tol {
            c.zero += 1;
        } else if l.re < T::zero() {
            c.negative += 1;
        } else {
            c.positive += 1;
        }
    }
    c
}
