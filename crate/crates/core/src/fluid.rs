//! Stationary law of a fluid queue reflected at zero.
//!
//! With `Ψ` the first-passage matrix from above, the stationary law has an
//! atom `(0, ζ)` at level zero and density
//! `π(x) = ζ T⁻⁺ e^{Kx} [(C⁺)⁻¹, Ψ|C⁻|⁻¹]` for `x > 0`, where
//! `K = (C⁺)⁻¹T⁺⁺ + Ψ|C⁻|⁻¹T⁻⁺`.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::model::FluidModel;
use crate::numerics::{expm, left_null_vector_scaled, solve_left_vec};
use crate::quadsolve::{riccati_min_nonneg, RiccatiBlocks};
use crate::scalar::Scalar;

/// Relative drift magnitude below which `ζ` is flagged as ill-conditioned.
pub const NEAR_CRITICAL_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FluidStationary<T> {
    pub psi: DenseMatrix<T>,
    pub k: DenseMatrix<T>,
    pub zeta: Vec<T>,
    pub model: FluidModel<T>,
    /// Set when the mean drift is close to zero relative to the rates.
    pub warning: Option<String>,
    /// `ζ T⁻⁺`
    head: Vec<T>,
    /// `[(C⁺)⁻¹, Ψ|C⁻|⁻¹]`
    tail: DenseMatrix<T>,
}

fn inv<T: Scalar>(v: &[T]) -> Vec<T> {
    v.iter().map(|&c| T::one() / c).collect()
}

pub fn fluid_stationary<T: Scalar>(fm: &FluidModel<T>) -> Result<FluidStationary<T>> {
    let drift = fm.mean_drift()?;
    if !(drift < T::zero()) {
        return Err(Error::NotRecurrent {
            drift: drift.as_f64(),
        });
    }
    let blocks = RiccatiBlocks::from_fluid(fm);
    let psi = riccati_min_nonneg(&blocks.a, &blocks.b, &blocks.c, &blocks.d)?;
    let k = &blocks.a + &(&psi * &blocks.c);

    let (np, nm) = (fm.n_plus(), fm.n_minus());
    let mut tail = DenseMatrix::zeros(np, np + nm);
    tail.set_block(0, 0, &DenseMatrix::from_diag(&inv(fm.c_plus())));
    tail.set_block(0, np, &psi.scale_cols(&inv(&fm.abs_c_minus())));

    let t_mp = fm.t_mp();
    let censored = &fm.t_mm() + &(&t_mp * &psi);
    let v = left_null_vector_scaled(&censored, fm.t().max_abs())?;
    let vt = t_mp.left_mul_vec(&v);
    let neg_k = -&k;
    let ones = vec![T::one(); np + nm];
    let mass = solve_left_vec(&vt, &neg_k)
        .map_err(|_| Error::Singular("-K in the density normalization".into()))?;
    let norm = v.iter().copied().sum::<T>() + dot(&mass, &tail.mul_vec(&ones));
    if !(norm > T::zero()) {
        return Err(Error::Singular(format!("normalization constant {norm} is not positive")));
    }
    let zeta: Vec<T> = v.iter().map(|&x| x / norm).collect();
    let head = t_mp.left_mul_vec(&zeta);

    let scale = fm.rates().iter().fold(T::zero(), |a, c| a.max(c.abs()));
    let warning = (drift.abs() < T::c(NEAR_CRITICAL_DRIFT) * scale).then(|| {
        format!("mean drift {:e} is close to zero; the atom at level zero is ill-conditioned", drift.as_f64())
    });

    Ok(FluidStationary {
        psi,
        k,
        zeta,
        model: fm.clone(),
        warning,
        head,
        tail,
    })
}

impl<T: Scalar> FluidStationary<T> {
    pub(crate) fn density_at(&self, x: T) -> Result<Vec<T>> {
        let e = expm(&self.k.scale(x))?;
        Ok(self.tail.left_mul_vec(&e.left_mul_vec(&self.head)))
    }

    /// Probability of `(0, x]` per phase.
    pub(crate) fn positive_mass_below(&self, x: T) -> Result<Vec<T>> {
        let np = self.model.n_plus();
        let e = expm(&self.k.scale(x))?;
        let w = solve_left_vec(&self.head, &-&self.k)?;
        let diff = &DenseMatrix::identity(np) - &e;
        Ok(self.tail.left_mul_vec(&diff.left_mul_vec(&w)))
    }
}

/// Stationary density per phase at level `x > 0`.
pub fn fluid_density<T: Scalar>(st: &FluidStationary<T>, x: T) -> Result<Vec<T>> {
    if !(x > T::zero()) {
        return Err(Error::InvalidArgument(format!("density level must be positive, got {x}")));
    }
    st.density_at(x)
}

/// Densities on a grid of positive levels, one row per level.
pub fn fluid_density_grid<T: Scalar>(st: &FluidStationary<T>, xs: &[T]) -> Result<Vec<Vec<T>>> {
    xs.iter().map(|&x| fluid_density(st, x)).collect()
}

/// Atom at level zero: zero on ascending phases, `ζ` on descending ones.
pub fn fluid_mass_zero<T: Scalar>(st: &FluidStationary<T>) -> Vec<T> {
    let mut out = vec![T::zero(); st.model.n_plus()];
    out.extend_from_slice(&st.zeta);
    out
}

/// Joint distribution function `P(level ≤ x, phase = j)` for `x ≥ 0`.
pub fn fluid_cdf<T: Scalar>(st: &FluidStationary<T>, x: T) -> Result<Vec<T>> {
    if !(x >= T::zero()) {
        return Err(Error::InvalidArgument(format!("cdf level must be nonnegative, got {x}")));
    }
    let below = st.positive_mass_below(x)?;
    Ok(fluid_mass_zero(st)
        .iter()
        .zip(below)
        .map(|(&a, b)| a + b)
        .collect())
}

/// First-passage matrix from below, `Ψ*`, from the level-negated model.
pub fn psi_star<T: Scalar>(fm: &FluidModel<T>) -> Result<DenseMatrix<T>> {
    let blocks = RiccatiBlocks::from_fluid(&fm.reversed());
    riccati_min_nonneg(&blocks.a, &blocks.b, &blocks.c, &blocks.d)
}

/// `K* = Ψ*(C⁺)⁻¹T⁺⁻ + |C⁻|⁻¹T⁻⁻`.
pub fn k_star<T: Scalar>(fm: &FluidModel<T>, psi_star: &DenseMatrix<T>) -> DenseMatrix<T> {
    let b = fm.t_pm().scale_rows(&inv(fm.c_plus()));
    let d = fm.t_mm().scale_rows(&inv(&fm.abs_c_minus()));
    &(psi_star * &b) + &d
}
