//! Convergence of the duplicated-phase fluid queues to the MMBM as the
//! switching intensity `λ = 1/ε²` grows: moment generating functions,
//! first-passage expansions and stationary densities.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluid::{fluid_stationary, k_star, psi_star};
use crate::matrix::{vec_max_abs, vec_sub, DenseMatrix};
use crate::mmbm::{mmbm_stationary, MmbmStationary};
use crate::model::{fluidize, MmbmModel};
use crate::numerics::{expm, quadrature};
use crate::scalar::Scalar;

/// `Δ_Y(s) = sD + (s²/2)V + Q`.
pub fn laplace_exponent_mmbm<T: Scalar>(model: &MmbmModel<T>, s: T) -> DenseMatrix<T> {
    let diag: Vec<T> = model
        .mu()
        .iter()
        .zip(model.sigma2())
        .map(|(&u, &v)| s * u + s * s * T::c(0.5) * v)
        .collect();
    model.q().clone() + DenseMatrix::from_diag(&diag)
}

/// `Δ̃_λ(s) = s C_λ + T_λ` for the fluid approximation at intensity `λ`.
pub fn laplace_exponent_fluid<T: Scalar>(model: &MmbmModel<T>, lambda: T, s: T) -> Result<DenseMatrix<T>> {
    let fm = fluidize(model, lambda)?;
    let rates: Vec<T> = fm.rates().iter().map(|&c| s * c).collect();
    Ok(fm.t().clone() + DenseMatrix::from_diag(&rates))
}

/// `(γ ⊗ I) X (1 ⊗ I)` with `γ = (½, ½)`: average over copies of the block sums.
pub fn marginalize_blocks<T: Scalar>(x: &DenseMatrix<T>) -> DenseMatrix<T> {
    let m = x.rows() / 2;
    let sum = &(&x.block(0, 0, m, m) + &x.block(0, m, m, m))
        + &(&x.block(m, 0, m, m) + &x.block(m, m, m, m));
    sum.scale(T::c(0.5))
}

/// Sum of the two copies of a row vector over the duplicated phases.
pub fn marginalize_vec<T: Scalar>(v: &[T]) -> Vec<T> {
    let m = v.len() / 2;
    (0..m).map(|i| v[i] + v[m + i]).collect()
}

/// `Υ = [[M, s√λΘ], [s√λΘ, M − 2λI]]` with `M = sD + Q`: the fluid exponent
/// `Δ̃_λ(s)` in the basis of copy sums and copy differences.
pub fn mgf_generator<T: Scalar>(model: &MmbmModel<T>, lambda: T, s: T) -> Result<DenseMatrix<T>> {
    fluidize(model, lambda)?;
    let base = &model.d().scale(s) + model.q();
    let coupling = model.theta().scale(s * lambda.sqrt());
    Ok(DenseMatrix::from_blocks(
        &base,
        &coupling,
        &coupling,
        &base.add_diag(T::c(-2.0) * lambda),
    ))
}

/// `(γ⊗I) e^{Δ̃_λ(s)t} (1⊗I)`, computed as the corner block `[I 0] e^{Υt} [I 0]ᵀ`.
pub fn fluid_mgf<T: Scalar>(model: &MmbmModel<T>, lambda: T, s: T, t: T) -> Result<DenseMatrix<T>> {
    corner_block(&mgf_generator(model, lambda, s)?, model.m(), t)
}

/// `(γ⊗I) e^{Δ̃_λ(s)t} (1⊗I)` by exponentiating the full fluid exponent.
pub fn fluid_mgf_direct<T: Scalar>(model: &MmbmModel<T>, lambda: T, s: T, t: T) -> Result<DenseMatrix<T>> {
    Ok(marginalize_blocks(&expm(&laplace_exponent_fluid(model, lambda, s)?.scale(t))?))
}

/// `‖(γ⊗I) e^{Δ̃_λ(s)t} (1⊗I) − e^{Δ_Y(s)t}‖`.
pub fn mgf_gap<T: Scalar>(model: &MmbmModel<T>, lambda: T, s: T, t: T) -> Result<T> {
    if !(t > T::zero()) || !t.is_finite() || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite s and t > 0, got s = {s}, t = {t}")));
    }
    let fluid = fluid_mgf(model, lambda, s, t)?;
    let limit = expm(&laplace_exponent_mmbm(model, s).scale(t))?;
    Ok((&fluid - &limit).max_abs())
}

/// North-west `m1 x m1` block of `e^{St}`. When either off-diagonal block
/// vanishes this is `e^{S₁₁t}` exactly.
pub fn corner_block<T: Scalar>(s: &DenseMatrix<T>, m1: usize, t: T) -> Result<DenseMatrix<T>> {
    if !s.is_square() || m1 == 0 || m1 >= s.rows() {
        return Err(Error::InvalidArgument(format!(
            "corner block of order {m1} in a {}x{} matrix",
            s.rows(),
            s.cols()
        )));
    }
    if !(t >= T::zero()) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let n = s.rows();
    let is_zero = |b: DenseMatrix<T>| b.max_abs() == T::zero();
    if is_zero(s.block(0, m1, m1, n - m1)) || is_zero(s.block(m1, 0, n - m1, m1)) {
        return expm(&s.block(0, 0, m1, m1).scale(t));
    }
    Ok(expm(&s.scale(t))?.block(0, 0, m1, m1))
}

/// Right-hand side of the renewal equation for the corner block,
/// `e^{S₁₁t} + ∫₀ᵗ ∫ᵥᵗ e^{S₁₁(t−u)} S₁₂ e^{S₂₂(u−v)} S₂₁ H(v) du dv`,
/// by nested Gauss–Legendre quadrature with `panels` panels per axis.
pub fn corner_block_rhs<T: Scalar>(s: &DenseMatrix<T>, m1: usize, t: T, panels: usize) -> Result<DenseMatrix<T>> {
    corner_block(s, m1, t)?;
    let n = s.rows();
    let m2 = n - m1;
    let s11 = s.block(0, 0, m1, m1);
    let s12 = s.block(0, m1, m1, m2);
    let s21 = s.block(m1, 0, m2, m1);
    let s22 = s.block(m1, m1, m2, m2);
    let direct = expm(&s11.scale(t))?;
    if t == T::zero() {
        return Ok(direct);
    }
    let flat = |m: DenseMatrix<T>| m.as_slice().to_vec();
    let outer = quadrature(
        |v| {
            if v >= t {
                return vec![T::zero(); m1 * m1];
            }
            let inner = quadrature(
                |u| {
                    let left = expm(&s11.scale(t - u)).expect("finite");
                    let right = expm(&s22.scale(u - v)).expect("finite");
                    flat(&(&left * &s12) * &right)
                },
                v,
                t,
                panels,
            )
            .expect("v < t");
            let inner = DenseMatrix::from_vec(m1, m2, inner).expect("finite");
            let h_v = corner_block(s, m1, v).expect("valid block");
            flat(&(&inner * &s21) * &h_v)
        },
        T::zero(),
        t,
        panels,
    )?;
    Ok(direct + DenseMatrix::from_vec(m1, m1, outer)?)
}

/// `‖H(t) − RHS‖` for the corner-block renewal equation.
pub fn corner_block_residual<T: Scalar>(s: &DenseMatrix<T>, m1: usize, t: T, panels: usize) -> Result<T> {
    let h = corner_block(s, m1, t)?;
    Ok((&h - &corner_block_rhs(s, m1, t, panels)?).max_abs())
}

/// Least-squares fit of `ln gap = slope · ln ε + intercept`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub points: usize,
}

/// Fits a log-log slope; `None` with fewer than three positive points.
pub fn fit_slope(eps: &[f64], gaps: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(gaps)
        .filter(|(&e, &g)| e > 0.0 && g > 0.0 && g.is_finite())
        .map(|(&e, &g)| (e.ln(), g.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Some(SlopeFit {
        slope,
        intercept,
        residual: (rss / n).sqrt(),
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportPoint {
    pub lambda: f64,
    pub eps: f64,
    pub metrics: BTreeMap<String, f64>,
}

/// Error metrics along a grid of intensities with fitted log-log slopes
/// against `ε`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConvergenceReport {
    pub points: Vec<ReportPoint>,
    pub slopes: BTreeMap<String, SlopeFit>,
}

impl ConvergenceReport {
    fn assemble(points: Vec<ReportPoint>) -> Self {
        let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
        let mut names: Vec<String> = points.iter().flat_map(|p| p.metrics.keys().cloned()).collect();
        names.sort();
        names.dedup();
        let slopes = names
            .into_iter()
            .filter_map(|name| {
                let gaps: Vec<f64> = points
                    .iter()
                    .map(|p| p.metrics.get(&name).copied().unwrap_or(f64::NAN))
                    .collect();
                fit_slope(&eps, &gaps).map(|f| (name, f))
            })
            .collect();
        Self { points, slopes }
    }

    pub fn metric(&self, name: &str) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.metrics.get(name).copied().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn slope(&self, name: &str) -> Option<f64> {
        self.slopes.get(name).map(|f| f.slope)
    }

    /// Merges reports computed on the same grid.
    pub fn merge(mut self, other: ConvergenceReport) -> Result<Self> {
        if self.points.len() != other.points.len()
            || self.points.iter().zip(&other.points).any(|(a, b)| a.lambda != b.lambda)
        {
            return Err(Error::InvalidArgument("reports use different grids".into()));
        }
        for (a, b) in self.points.iter_mut().zip(other.points) {
            a.metrics.extend(b.metrics);
        }
        Ok(Self::assemble(self.points))
    }

    /// One row per grid point per metric: `lambda,eps,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,eps,metric,value\n");
        for p in &self.points {
            for (name, v) in &p.metrics {
                out.push_str(&format!("{:.16e},{:.16e},{name},{:.16e}\n", p.lambda, p.eps, v));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_grid(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("empty {what} list")));
    }
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} values must be positive and finite")));
    }
    let inc = values.windows(2).all(|w| w[0] < w[1]);
    let dec = values.windows(2).all(|w| w[0] > w[1]);
    if !(inc || dec) {
        return Err(Error::InvalidArgument(format!("{what} grid must be strictly monotone")));
    }
    Ok(())
}

fn check_admissible<T: Scalar>(model: &MmbmModel<T>, lambdas: &[f64]) -> Result<()> {
    for &l in lambdas {
        fluidize(model, T::c(l))?;
    }
    Ok(())
}

fn gap<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> f64 {
    (a - b).max_abs().as_f64()
}

/// First-passage and `K` expansions at `λ = 1/ε²`: records
/// `psi_gap = ‖Ψ_ε − I − εΨ₁‖`, `psi_star_gap = ‖Ψ*_ε − I − εΨ₁*‖`,
/// `k_gap = ‖K_ε − K₀‖`, `k_star_gap = ‖K*_ε − K₀*‖` and
/// `zeta_gap = ‖ζ_ε/ε − ζ₁‖`.
pub fn expansion_report<T: Scalar>(model: &MmbmModel<T>, eps_list: &[f64]) -> Result<ConvergenceReport> {
    check_grid(eps_list, "epsilon")?;
    let lambdas: Vec<f64> = eps_list.iter().map(|&e| 1.0 / (e * e)).collect();
    check_admissible(model, &lambdas)?;
    let limit = mmbm_stationary(model)?;
    let id = DenseMatrix::identity(model.m());
    let points: Result<Vec<ReportPoint>> = eps_list
        .par_iter()
        .zip(&lambdas)
        .map(|(&e, &lambda)| {
            let eps = T::c(e);
            let fm = fluidize(model, T::c(lambda))?;
            let st = fluid_stationary(&fm)?;
            let ps = psi_star(&fm)?;
            let ks = k_star(&fm, &ps);
            let psi_lin = &id + &limit.psi1.scale(eps);
            let psi_star_lin = &id + &limit.psi1_star.scale(eps);
            let zeta_scaled: Vec<T> = st.zeta.iter().map(|&z| z / eps).collect();
            let metrics = BTreeMap::from([
                ("psi_gap".to_string(), gap(&st.psi, &psi_lin)),
                ("psi_star_gap".to_string(), gap(&ps, &psi_star_lin)),
                ("k_gap".to_string(), gap(&st.k, &limit.k0)),
                ("k_star_gap".to_string(), gap(&ks, &limit.k0_star)),
                (
                    "zeta_gap".to_string(),
                    vec_max_abs(&vec_sub(&zeta_scaled, &limit.zeta1)).as_f64(),
                ),
            ]);
            Ok(ReportPoint {
                lambda,
                eps: e,
                metrics,
            })
        })
        .collect();
    Ok(ConvergenceReport::assemble(points?))
}

/// Stationary densities of the fluid approximations against the MMBM limit:
/// `density_sup_gap = sup_x ‖π_ε(x)(1⊗I) − 2ζ₁e^{K₀x}Θ⁻¹‖` over `x_grid` and
/// `mass_zero_gap = ‖F_ε(0)(1⊗I)‖`.
pub fn density_convergence<T: Scalar>(
    model: &MmbmModel<T>,
    lambda_list: &[f64],
    x_grid: &[f64],
) -> Result<ConvergenceReport> {
    check_grid(lambda_list, "lambda")?;
    if x_grid.is_empty() || x_grid.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("x grid must be nonempty and positive".into()));
    }
    check_admissible(model, lambda_list)?;
    let limit = mmbm_stationary(model)?;
    let reference: Vec<Vec<T>> = x_grid
        .iter()
        .map(|&x| limit.density_at(T::c(x)))
        .collect::<Result<_>>()?;
    let points: Result<Vec<ReportPoint>> = lambda_list
        .par_iter()
        .map(|&lambda| {
            let st = fluid_stationary(&fluidize(model, T::c(lambda))?)?;
            let mut sup = 0.0f64;
            for (&x, r) in x_grid.iter().zip(&reference) {
                let marg = marginalize_vec(&st.density_at(T::c(x))?);
                sup = sup.max(vec_max_abs(&vec_sub(&marg, r)).as_f64());
            }
            let metrics = BTreeMap::from([
                ("density_sup_gap".to_string(), sup),
                ("mass_zero_gap".to_string(), vec_max_abs(&st.zeta).as_f64()),
            ]);
            Ok(ReportPoint {
                lambda,
                eps: 1.0 / lambda.sqrt(),
                metrics,
            })
        })
        .collect();
    Ok(ConvergenceReport::assemble(points?))
}

/// `mgf_gap` at time `t` along a grid of intensities, one metric
/// `mgf_gap_s=<s>` per argument `s`.
pub fn mgf_report<T: Scalar>(model: &MmbmModel<T>, lambda_list: &[f64], s_list: &[f64], t: f64) -> Result<ConvergenceReport> {
    check_grid(lambda_list, "lambda")?;
    check_admissible(model, lambda_list)?;
    if s_list.is_empty() {
        return Err(Error::InvalidArgument("empty list of mgf arguments".into()));
    }
    let points: Result<Vec<ReportPoint>> = lambda_list
        .par_iter()
        .map(|&lambda| {
            let metrics = s_list
                .iter()
                .map(|&s| Ok((format!("mgf_gap_s={s}"), mgf_gap(model, T::c(lambda), T::c(s), T::c(t))?.as_f64())))
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok(ReportPoint {
                lambda,
                eps: 1.0 / lambda.sqrt(),
                metrics,
            })
        })
        .collect();
    Ok(ConvergenceReport::assemble(points?))
}

/// 64 log-spaced levels on `[10⁻³, 20/|a|]` with `a` the spectral abscissa of `K₀`.
pub fn default_x_grid<T: Scalar>(st: &MmbmStationary<T>) -> Result<Vec<f64>> {
    let a = st.spectral_abscissa()?.as_f64().abs();
    Ok(log_grid(1e-3, 20.0 / a, 64))
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
