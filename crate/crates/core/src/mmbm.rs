//! Stationary law of a reflected Markov-modulated Brownian motion.
//!
//! Two independent routes are provided. The limit route solves
//! `P(X) = X² + 2V⁻¹D X + 2V⁻¹Q = 0` for a weakly-stable and a
//! strictly-antistable solvent and yields the density `2 ζ₁ e^{K₀x} Θ⁻¹`.
//! The time-reversal route solves `½ Z² V − Z D + Q = 0` for a stable `Z` and
//! yields `−α Z e^{Zx}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{vec_max_abs, vec_sub, DenseMatrix};
use crate::model::MmbmModel;
use crate::numerics::{eigenvalues, expm, half_plane_counts, left_null_vector_scaled, solve_left_vec, HalfPlaneCounts};
use crate::quadsolve::{solve_stable, QuadraticEq, SpectralMode, EIG_ZERO_TOL};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct MmbmStationary<T> {
    pub psi1: DenseMatrix<T>,
    pub psi1_star: DenseMatrix<T>,
    pub k0: DenseMatrix<T>,
    pub k0_star: DenseMatrix<T>,
    pub zeta1: Vec<T>,
    pub model: MmbmModel<T>,
}

fn inv<T: Scalar>(v: &[T]) -> Vec<T> {
    v.iter().map(|&c| T::one() / c).collect()
}

/// `X² + 2V⁻¹D X + 2V⁻¹Q = 0`.
pub fn p_equation<T: Scalar>(model: &MmbmModel<T>) -> QuadraticEq<T> {
    let two_vinv: Vec<T> = model.sigma2().iter().map(|&s| T::c(2.0) / s).collect();
    QuadraticEq::monic(model.d().scale_rows(&two_vinv), model.q().scale_rows(&two_vinv))
        .expect("model matrices are square")
}

/// Relative residual of `X² + X·2V⁻¹D + 2Θ⁻¹QΘ⁻¹ = 0`, the equation shared
/// by `−K₀` and `K₀*`.
pub fn k_equation_residual<T: Scalar>(model: &MmbmModel<T>, x: &DenseMatrix<T>) -> T {
    let two_vinv: Vec<T> = model.sigma2().iter().map(|&s| T::c(2.0) / s).collect();
    let inv_theta = inv(model.sigma());
    let right = model.d().scale_rows(&two_vinv);
    let constant = model.q().scale_rows(&inv_theta).scale_cols(&inv_theta).scale(T::c(2.0));
    let res = &(&(x * x) + &(x * &right)) + &constant;
    let scale = T::one() + T::one().max(right.max_abs()).max(constant.max_abs());
    res.max_abs() / scale
}

fn check_counts<T: Scalar>(what: &str, x: &DenseMatrix<T>, mode: SpectralMode) -> Result<()> {
    let counts = spectral_counts(x)?;
    let expected = mode.expected_counts(x.rows());
    if counts == expected {
        Ok(())
    } else {
        Err(Error::SpectralCount(format!(
            "{what}: (neg, zero, pos) = ({}, {}, {}), expected ({}, {}, {})",
            counts.negative, counts.zero, counts.positive, expected.negative, expected.zero, expected.positive
        )))
    }
}

/// Half-plane eigenvalue counts with zero tolerance `1e−8·(1 + ‖X‖)`.
pub fn spectral_counts<T: Scalar>(x: &DenseMatrix<T>) -> Result<HalfPlaneCounts> {
    let tol = T::c(EIG_ZERO_TOL) * (T::one() + x.max_abs());
    Ok(half_plane_counts(&eigenvalues(x)?, tol))
}

pub fn mmbm_stationary<T: Scalar>(model: &MmbmModel<T>) -> Result<MmbmStationary<T>> {
    model.require_recurrent()?;
    let p = p_equation(model);
    let theta = model.theta();
    let inv_theta = inv(model.sigma());
    let weak = solve_stable(&p, SpectralMode::WeaklyStable)?;
    let anti = solve_stable(&p, SpectralMode::StrictlyAntistable)?;
    let psi1 = &theta * &weak;
    let psi1_star = -(&theta * &anti);

    let two_vinv_d: Vec<T> = model
        .mu()
        .iter()
        .zip(model.sigma2())
        .map(|(&u, &s)| T::c(2.0) * u / s)
        .collect();
    let drift_term = DenseMatrix::from_diag(&two_vinv_d);
    let k0 = &psi1.scale_cols(&inv_theta) + &drift_term;
    let k0_star = &psi1_star.scale_cols(&inv_theta) - &drift_term;
    check_counts("K0", &k0, SpectralMode::StrictlyStable)?;
    check_counts("K0*", &k0_star, SpectralMode::WeaklyStable)?;

    let sigma_max = model.sigma().iter().fold(T::zero(), |a, &b| a.max(b));
    let v = left_null_vector_scaled(&psi1, p.coefficient_scale() * sigma_max)?;
    let w = solve_left_vec(&v, &-&k0)?;
    let norm: T = w.iter().zip(&inv_theta).map(|(&a, &b)| a * b).sum::<T>() * T::c(2.0);
    if !(norm > T::zero()) {
        return Err(Error::Singular(format!("normalization constant {norm} is not positive")));
    }
    let zeta1 = v.iter().map(|&x| x / norm).collect();
    Ok(MmbmStationary {
        psi1,
        psi1_star,
        k0,
        k0_star,
        zeta1,
        model: model.clone(),
    })
}

impl<T: Scalar> MmbmStationary<T> {
    pub(crate) fn density_at(&self, x: T) -> Result<Vec<T>> {
        let e = expm(&self.k0.scale(x))?;
        let inv_theta = inv(self.model.sigma());
        Ok(e.left_mul_vec(&self.zeta1)
            .iter()
            .zip(&inv_theta)
            .map(|(&a, &b)| T::c(2.0) * a * b)
            .collect())
    }

    /// Largest real part among the eigenvalues of `K₀` (negative).
    pub fn spectral_abscissa(&self) -> Result<T> {
        Ok(eigenvalues(&self.k0)?
            .iter()
            .fold(T::neg_infinity(), |a, e| a.max(e.re)))
    }
}

/// `2 ζ₁ e^{K₀x} Θ⁻¹` per phase, `x > 0`.
pub fn mmbm_density<T: Scalar>(st: &MmbmStationary<T>, x: T) -> Result<Vec<T>> {
    if !(x > T::zero()) {
        return Err(Error::InvalidArgument(format!("density level must be positive, got {x}")));
    }
    st.density_at(x)
}

/// `P(level ≤ x, phase = j) = 2 ζ₁ (−K₀)⁻¹ (I − e^{K₀x}) Θ⁻¹`.
pub fn mmbm_cdf<T: Scalar>(st: &MmbmStationary<T>, x: T) -> Result<Vec<T>> {
    if !(x >= T::zero()) {
        return Err(Error::InvalidArgument(format!("cdf level must be nonnegative, got {x}")));
    }
    let m = st.model.m();
    let w = solve_left_vec(&st.zeta1, &-&st.k0)?;
    let diff = &DenseMatrix::identity(m) - &expm(&st.k0.scale(x))?;
    Ok(diff
        .left_mul_vec(&w)
        .iter()
        .zip(st.model.sigma())
        .map(|(&a, &s)| T::c(2.0) * a / s)
        .collect())
}

/// The reflected MMBM has no atom at zero.
pub fn mmbm_mass_zero<T: Scalar>(st: &MmbmStationary<T>) -> Vec<T> {
    vec![T::zero(); st.model.m()]
}

/// `ζ₁ = −α (Θ⁻¹D + ½ Θ Ψ₁ Θ⁻¹)`.
pub fn zeta1_closed_form<T: Scalar>(model: &MmbmModel<T>, psi1: &DenseMatrix<T>) -> Vec<T> {
    let inv_theta = inv(model.sigma());
    let drift: Vec<T> = model.mu().iter().zip(&inv_theta).map(|(&u, &s)| u * s).collect();
    let inner = &DenseMatrix::from_diag(&drift)
        + &psi1.scale_rows(model.sigma()).scale_cols(&inv_theta).scale(T::c(0.5));
    inner.left_mul_vec(model.alpha()).iter().map(|&x| -x).collect()
}

/// Stable solution `Z` of `½ Z² V − Z D + Q = 0`, computed from the transposed
/// monic equation `Y² − 2V⁻¹D Y + 2V⁻¹Qᵀ = 0` with `Z = Yᵀ`.
pub fn asmussen_z<T: Scalar>(model: &MmbmModel<T>) -> Result<DenseMatrix<T>> {
    model.require_recurrent()?;
    let two_vinv: Vec<T> = model.sigma2().iter().map(|&s| T::c(2.0) / s).collect();
    let eq = QuadraticEq::monic(
        -&model.d().scale_rows(&two_vinv),
        model.q().transpose().scale_rows(&two_vinv),
    )?;
    Ok(solve_stable(&eq, SpectralMode::StrictlyStable)?.transpose())
}

/// `−α Z e^{Zx}` per phase, `x > 0`.
pub fn asmussen_density<T: Scalar>(model: &MmbmModel<T>, z: &DenseMatrix<T>, x: T) -> Result<Vec<T>> {
    if !(x > T::zero()) {
        return Err(Error::InvalidArgument(format!("density level must be positive, got {x}")));
    }
    asmussen_density_at(model, z, x)
}

fn asmussen_density_at<T: Scalar>(model: &MmbmModel<T>, z: &DenseMatrix<T>, x: T) -> Result<Vec<T>> {
    let az = z.left_mul_vec(model.alpha());
    Ok(expm(&z.scale(x))?.left_mul_vec(&az).iter().map(|&v| -v).collect())
}

/// Agreement between the limit route and the time-reversal route.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    /// Null-vector `ζ₁` against the closed form.
    pub zeta_gap: f64,
    /// `sup |2ζ₁e^{K₀x}Θ⁻¹ − (−αZe^{Zx})|` over the grid.
    pub density_sup_gap: f64,
    /// `‖K₀ − Θ⁻¹ Z Θ‖`.
    pub similarity_gap: f64,
    pub x_max: f64,
    pub points: usize,
}

/// Compares both routes on `points` equispaced levels in `[0, x_max]`.
pub fn crosscheck<T: Scalar>(st: &MmbmStationary<T>, x_max: T, points: usize) -> Result<CrossCheck> {
    if points < 2 || !(x_max > T::zero()) {
        return Err(Error::InvalidArgument("crosscheck needs x_max > 0 and at least 2 points".into()));
    }
    let model = &st.model;
    let z = asmussen_z(model)?;
    let similar = z.scale_rows(&inv(model.sigma())).scale_cols(model.sigma());
    let similarity_gap = (&st.k0 - &similar).max_abs().as_f64();
    let zeta_gap = vec_max_abs(&vec_sub(&st.zeta1, &zeta1_closed_form(model, &st.psi1))).as_f64();
    let mut density_sup_gap = 0.0f64;
    for i in 0..points {
        let x = x_max * T::c(i as f64 / (points - 1) as f64);
        let a = st.density_at(x)?;
        let b = asmussen_density_at(model, &z, x)?;
        density_sup_gap = density_sup_gap.max(vec_max_abs(&vec_sub(&a, &b)).as_f64());
    }
    Ok(CrossCheck {
        zeta_gap,
        density_sup_gap,
        similarity_gap,
        x_max: x_max.as_f64(),
        points,
    })
}

/// Residuals and eigenvalue counts of the four limit matrices.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub name: &'static str,
    pub residual: f64,
    pub counts: [usize; 3],
    pub expected: [usize; 3],
}

impl Certificate {
    pub fn passed(&self, tol: f64) -> bool {
        self.residual <= tol && self.counts == self.expected
    }
}

pub fn certificates<T: Scalar>(st: &MmbmStationary<T>) -> Result<Vec<Certificate>> {
    let model = &st.model;
    let p = p_equation(model);
    let inv_theta = inv(model.sigma());
    let weak = st.psi1.scale_rows(&inv_theta);
    let anti = -&st.psi1_star.scale_rows(&inv_theta);
    let neg_k0 = -&st.k0;
    let cases: [(&'static str, DenseMatrix<T>, T, SpectralMode); 4] = [
        ("theta_inv_psi1", weak.clone(), p.scaled_residual(&weak), SpectralMode::WeaklyStable),
        ("neg_theta_inv_psi1_star", anti.clone(), p.scaled_residual(&anti), SpectralMode::StrictlyAntistable),
        ("neg_k0", neg_k0.clone(), k_equation_residual(model, &neg_k0), SpectralMode::StrictlyAntistable),
        ("k0_star", st.k0_star.clone(), k_equation_residual(model, &st.k0_star), SpectralMode::WeaklyStable),
    ];
    cases
        .into_iter()
        .map(|(name, x, res, mode)| {
            let c = spectral_counts(&x)?;
            let e = mode.expected_counts(x.rows());
            Ok(Certificate {
                name,
                residual: res.as_f64(),
                counts: [c.negative, c.zero, c.positive],
                expected: [e.negative, e.zero, e.positive],
            })
        })
        .collect()
}
