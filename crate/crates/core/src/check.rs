//! Invariant suite run against a single model.

use serde::Serialize;

use crate::error::Result;
use crate::fluid::{fluid_cdf, fluid_stationary};
use crate::matrix::vec_max_abs;
use crate::mcsim::{ks_distance, simulate_mmbm, SimConfig};
use crate::mmbm::{certificates, crosscheck, mmbm_cdf, mmbm_stationary, p_equation};
use crate::model::{fluidize, is_irreducible, MmbmModel};
use crate::morph::{default_x_grid, density_convergence, expansion_report, mgf_gap};
use crate::numerics::{eigenvalues, solve_left_vec};
use crate::quadsolve::det_poly_roots;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub lambdas: Vec<f64>,
    pub eps: Vec<f64>,
    /// Bound on the relative residuals of the limit matrices.
    pub residual_tol: f64,
    /// Monte Carlo comparison, skipped when `None`.
    pub simulation: Option<SimConfig>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            lambdas: vec![1e2, 1e3, 1e4],
            eps: vec![0.1, 0.05, 0.025],
            residual_tol: 1e-10,
            simulation: None,
        }
    }
}

struct Table(Vec<CheckResult>);

impl Table {
    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.0.push(CheckResult {
            name: name.into(),
            passed: value <= bound,
            value,
            bound,
        });
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.0.push(CheckResult {
            name: name.into(),
            passed: value >= bound,
            value,
            bound,
        });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.0.push(CheckResult {
            name: name.into(),
            passed: ok,
            value: ok as u8 as f64,
            bound: 1.0,
        });
    }
}

/// Nonincreasing up to a relative slack.
fn nonincreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

pub fn run_checks(model: &MmbmModel<f64>, opts: &CheckOptions) -> Result<Vec<CheckResult>> {
    let mut t = Table(Vec::new());
    let m = model.m();

    let split = det_poly_roots(&p_equation(model))?;
    t.holds(
        "det roots split (m-1, 1, m)",
        (split.n_neg, split.n_zero, split.n_pos, split.n_infinite) == (m - 1, 1, m, 0),
    );

    let st = mmbm_stationary(model)?;
    for c in certificates(&st)? {
        t.at_most(format!("{} residual", c.name), c.residual, opts.residual_tol);
        t.holds(format!("{} eigenvalue counts", c.name), c.counts == c.expected);
    }

    let inv_theta: Vec<f64> = model.sigma().iter().map(|s| 1.0 / s).collect();
    let gen = st.psi1.scale_rows(&inv_theta);
    let off_diag_ok = (0..m).all(|i| (0..m).all(|j| i == j || gen[(i, j)] >= -1e-12));
    t.at_most("Theta^-1 Psi1 row sums", vec_max_abs(&gen.row_sums()), 1e-10);
    t.holds("Theta^-1 Psi1 is an irreducible generator", off_diag_ok && (m == 1 || is_irreducible(&gen)));

    t.at_most("zeta1 Psi1", vec_max_abs(&st.psi1.left_mul_vec(&st.zeta1)), 1e-10);
    let w = solve_left_vec(&st.zeta1, &-&st.k0)?;
    let norm: f64 = 2.0 * w.iter().zip(&inv_theta).map(|(a, b)| a * b).sum::<f64>();
    t.at_most("zeta1 normalization", (norm - 1.0).abs(), 1e-10);
    t.holds("zeta1 nonnegative", st.zeta1.iter().all(|&z| z >= -1e-14));

    let x = &gen;
    let vx = &model.v() * x;
    let d2 = model.d().scale(2.0);
    let constant = -(&(&vx + &d2) * x);
    t.at_most("factorization of V z^2 + 2 D z + 2 Q", (&constant - &model.q().scale(2.0)).max_abs(), 1e-9);

    let cc = crosscheck(&st, 20.0, 201)?;
    t.at_most("zeta1 null vector vs closed form", cc.zeta_gap, 1e-9);
    t.at_most("density vs time-reversal route", cc.density_sup_gap, 1e-8);
    t.at_most("K0 vs Theta^-1 Z Theta", cc.similarity_gap, 1e-8);

    let x_max = 20.0 / st.spectral_abscissa()?.abs();
    let total: f64 = mmbm_cdf(&st, 2.0 * x_max)?.iter().sum();
    t.at_most("MMBM total probability", (total - 1.0).abs(), 1e-8);

    for &lambda in &opts.lambdas {
        t.at_most(format!("mgf gap at s = 0, lambda = {lambda}"), mgf_gap(model, lambda, 0.0, 1.0)?, 1e-12);
        let fm = fluidize(model, lambda)?;
        let fs = fluid_stationary(&fm)?;
        let rows: Vec<f64> = fs.psi.row_sums().iter().map(|s| s - 1.0).collect();
        t.at_most(format!("Psi stochastic, lambda = {lambda}"), vec_max_abs(&rows), 1e-10);
        t.holds(
            format!("Psi nonnegative, lambda = {lambda}"),
            fs.psi.as_slice().iter().all(|&p| p >= -1e-14),
        );
        let abscissa = eigenvalues(&fs.k)?.iter().fold(f64::NEG_INFINITY, |a, e| a.max(e.re));
        t.holds(format!("K stable, lambda = {lambda}"), abscissa < 0.0);
        let reach = 40.0 / abscissa.abs();
        let total: f64 = fluid_cdf(&fs, reach)?.iter().sum();
        t.at_most(format!("fluid total probability, lambda = {lambda}"), (total - 1.0).abs(), 1e-8);
    }

    if opts.eps.len() >= 3 {
        let r = expansion_report(model, &opts.eps)?;
        for (name, bound) in [("psi_gap", 1.5), ("psi_star_gap", 1.5), ("k_gap", 0.7), ("k_star_gap", 0.7)] {
            match r.slope(name) {
                Some(s) => t.at_least(format!("{name} slope"), s, bound),
                // gaps at rounding level: exact expansion
                None => t.at_most(format!("{name} (exact)"), r.metric(name).iter().fold(0.0, |a: f64, &b| a.max(b)), 1e-10),
            }
        }
    }

    if opts.lambdas.len() >= 2 {
        let r = density_convergence(model, &opts.lambdas, &default_x_grid(&st)?)?;
        t.holds("density gaps nonincreasing", nonincreasing(&r.metric("density_sup_gap"), 0.05));
        t.holds("mass-at-zero gaps nonincreasing", nonincreasing(&r.metric("mass_zero_gap"), 0.05));
    }

    if let Some(cfg) = &opts.simulation {
        let emp = simulate_mmbm(model, cfg)?;
        let ks = ks_distance(&emp, |x| mmbm_cdf(&st, x))?;
        t.at_most("Monte Carlo KS distance", ks, 0.02);
        let occupancy = emp.occupancy();
        for (i, (&p, &a)) in occupancy.iter().zip(model.alpha()).enumerate() {
            let (_, se) = emp.batch_mean(50, |ph, _| (ph == i) as u8 as f64)?;
            t.at_most(format!("phase {} occupancy (|gap| / 3 se)", i + 1), (p - a).abs() / (3.0 * se.max(1e-300)), 1.0);
        }
    }

    Ok(t.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_phase_model_passes() {
        let model = MmbmModel::from_f64(&[&[-1.0, 1.0], &[1.0, -1.0]], &[1.0, -2.0], &[1.0, 1.0]).unwrap();
        let results = run_checks(&model, &CheckOptions::default()).unwrap();
        let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn single_phase_model_passes() {
        let model = MmbmModel::from_f64(&[&[0.0]], &[-1.0], &[2.0]).unwrap();
        let results = run_checks(&model, &CheckOptions::default()).unwrap();
        let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }
}
