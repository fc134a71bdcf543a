mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use fluid_morph::fluid::{fluid_density, fluid_mass_zero, fluid_stationary};
use fluid_morph::matrix::DenseMatrix;
use fluid_morph::mcsim::{ks_distance, simulate_fluid, simulate_mmbm, SimConfig};
use fluid_morph::mmbm::{certificates, crosscheck, mmbm_density, mmbm_stationary, p_equation};
use fluid_morph::model::{fluidize, FluidModel};
use fluid_morph::morph::{corner_block, default_x_grid, density_convergence, expansion_report, mgf_gap};
use fluid_morph::numerics::eigenvalues;
use fluid_morph::quadsolve::det_poly_roots;
use fluid_morph::Result;
use nalgebra::DMatrix;
use rand::Rng;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn f1() -> FluidModel<f64> {
    FluidModel::new(
        DenseMatrix::from_f64_rows(&[&[-2.0, 2.0], &[1.0, -1.0]]),
        vec![1.0],
        vec![-1.0],
    )
    .unwrap()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn scalar_exactness() -> Result<Outcome> {
    let st = mmbm_stationary(&m1())?;
    let mut sup = 0.0f64;
    for i in 1..=1000 {
        let x = 10.0 * i as f64 / 1000.0;
        sup = sup.max((mmbm_density(&st, x)?[0] - (-x).exp()).abs());
    }
    let zeta = (st.zeta1[0] - 0.5f64.sqrt()).abs();
    let k0 = (st.k0[(0, 0)] + 1.0).abs();
    let k0_star = st.k0_star[(0, 0)].abs();
    let worst = zeta.max(k0).max(k0_star);
    outcome(
        sup <= 1e-10 && worst <= 1e-12,
        format!("density sup gap {sup:.2e}, zeta1/K0/K0* worst gap {worst:.2e}"),
    )
}

fn residual_certificates() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut count_failures = 0;
    for model in model_suite() {
        for c in certificates(&mmbm_stationary(&model)?)? {
            worst = worst.max(c.residual);
            count_failures += (c.counts != c.expected) as usize;
        }
    }
    outcome(
        worst <= 1e-10 && count_failures == 0,
        format!("worst relative residual {worst:.2e}, eigenvalue count mismatches {count_failures}"),
    )
}

fn dual_route() -> Result<Outcome> {
    let (mut density, mut similarity) = (0.0f64, 0.0f64);
    for model in model_suite() {
        let cc = crosscheck(&mmbm_stationary(&model)?, 20.0, 401)?;
        density = density.max(cc.density_sup_gap);
        similarity = similarity.max(cc.similarity_gap);
    }
    outcome(
        density <= 1e-8 && similarity <= 1e-8,
        format!("worst density gap {density:.2e}, worst similarity gap {similarity:.2e}"),
    )
}

fn expansion_orders() -> Result<Outcome> {
    let r = expansion_report(&m2(), &[0.1, 0.05, 0.025, 0.0125])?;
    let psi = r.slope("psi_gap").unwrap_or(f64::NAN);
    let k = r.slope("k_gap").unwrap_or(f64::NAN);
    let zeta = r.metric("zeta_gap");
    outcome(
        (1.7..=2.3).contains(&psi) && (0.7..=1.3).contains(&k) && strictly_decreasing(&zeta),
        format!("psi slope {psi:.3}, K slope {k:.3}, zeta gaps {}", sci(&zeta)),
    )
}

fn density_morphing() -> Result<Outcome> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, model) in [("M1", m1()), ("M2", m2())] {
        let st = mmbm_stationary(&model)?;
        let r = density_convergence(&model, &[1e2, 1e3, 1e4], &default_x_grid(&st)?)?;
        let gaps = r.metric("density_sup_gap");
        let slope = r.slope("mass_zero_gap").unwrap_or(f64::NAN);
        ok &= strictly_decreasing(&gaps) && (0.7..=1.3).contains(&slope);
        detail.push(format!("{name}: density gaps {}, mass slope {slope:.3}", sci(&gaps)));
    }
    outcome(ok, detail.join("; "))
}

fn mgf_convergence() -> Result<Outcome> {
    let lambdas = [1e2, 1e3, 1e4];
    let mut ok = true;
    let mut worst_zero = 0.0f64;
    let mut detail = Vec::new();
    for (name, model) in [("M1", m1()), ("M2", m2())] {
        for &l in &lambdas {
            worst_zero = worst_zero.max(mgf_gap(&model, l, 0.0, 1.0)?);
        }
        for s in [0.25, 0.5] {
            let gaps: Vec<f64> = lambdas.iter().map(|&l| mgf_gap(&model, l, s, 1.0)).collect::<Result<_>>()?;
            ok &= gaps.iter().all(|g| g.is_finite()) && gaps[2] < gaps[0] && strictly_decreasing(&gaps);
            detail.push(format!("{name} s={s}: {}", sci(&gaps)));
        }
    }
    ok &= worst_zero <= 1e-12;
    outcome(ok, format!("s=0 worst gap {worst_zero:.2e}; {}", detail.join(", ")))
}

fn spectral_splitting() -> Result<Outcome> {
    let mut failures = 0;
    for model in model_suite() {
        let m = model.m();
        let split = det_poly_roots(&p_equation(&model))?;
        failures += ((split.n_neg, split.n_zero, split.n_pos, split.n_infinite) != (m - 1, 1, m, 0)) as usize;
    }
    outcome(failures == 0, format!("{failures} of 100 models with a wrong split"))
}

fn monte_carlo() -> Result<Outcome> {
    let cfg = SimConfig::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, model) in [("M1", m1()), ("M2", m2())] {
        let st = mmbm_stationary(&model)?;
        let emp = simulate_mmbm(&model, &cfg)?;
        let ks = ks_distance(&emp, |x| fluid_morph::mmbm::mmbm_cdf(&st, x))?;
        ok &= ks <= 0.02 && emp.len() >= 1_000_000;
        detail.push(format!("{name} KS {ks:.4} ({} samples)", emp.len()));
    }
    let emp = simulate_fluid(&f1(), &cfg)?;
    let closed = |x: f64| -> Result<Vec<f64>> {
        let tail = (1.0 - (-x).exp()) / 3.0;
        Ok(vec![tail, 1.0 / 3.0 + tail])
    };
    let ks = ks_distance(&emp, closed)?;
    let (atom, se) = emp.batch_mean(100, |phase, level| (phase == 1 && level == 0.0) as u8 as f64)?;
    let within = (atom - 1.0 / 3.0).abs() <= 3.0 * se;
    ok &= ks <= 0.02 && within && emp.len() >= 1_000_000;
    detail.push(format!("F1 KS {ks:.4}, atom {atom:.4} (se {se:.1e})"));
    outcome(ok, detail.join("; "))
}

/// `ζ·1 + ∫ density`, with the integral taken by graded Gauss–Legendre.
fn fluid_total(fm: &FluidModel<f64>) -> Result<f64> {
    let st = fluid_stationary(fm)?;
    let abscissa = eigenvalues(&st.k)?.iter().fold(f64::NEG_INFINITY, |a, e| a.max(e.re));
    let reach = 60.0 / abscissa.abs();
    let mass: f64 = fluid_mass_zero(&st).iter().sum();
    let integral = graded_integral(|x| fluid_density(&st, x).unwrap().iter().sum(), 1e-7, reach);
    Ok(mass + integral)
}

fn fluid_closed_forms() -> Result<Outcome> {
    let st = fluid_stationary(&f1())?;
    let closed = (st.psi[(0, 0)] - 1.0)
        .abs()
        .max((st.k[(0, 0)] + 1.0).abs())
        .max((st.zeta[0] - 1.0 / 3.0).abs());
    let mut models = vec![f1()];
    for model in [m1(), m2()] {
        for l in [1e2, 1e3, 1e4] {
            models.push(fluidize(&model, l)?);
        }
    }
    for model in model_suite().iter().take(20) {
        let ratio = model
            .mu()
            .iter()
            .zip(model.sigma2())
            .fold(0.0f64, |a, (u, v)| a.max(u * u / v));
        models.push(fluidize(model, 100.0 * (1.0 + ratio))?);
    }
    let mut worst = 0.0f64;
    for fm in &models {
        worst = worst.max((fluid_total(fm)? - 1.0).abs());
    }
    outcome(
        closed <= 1e-12 && worst <= 1e-8,
        format!("F1 closed-form gap {closed:.2e}, worst total-probability gap {worst:.2e} over {} models", models.len()),
    )
}

/// `e^{S₁₁t} + ∫₀ᵗ∫ᵥᵗ e^{S₁₁(t−u)} S₁₂ e^{S₂₂(u−v)} S₂₁ H(v) du dv` with `H(v)`
/// the corner of the full exponential, everything in nalgebra.
fn renewal_rhs(s: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let s11 = s.view((0, 0), (2, 2)).into_owned();
    let s12 = s.view((0, 2), (2, 2)).into_owned();
    let s21 = s.view((2, 0), (2, 2)).into_owned();
    let s22 = s.view((2, 2), (2, 2)).into_owned();
    let h = |v: f64| (s * v).exp().view((0, 0), (2, 2)).into_owned();
    let outer = simpson(
        |v| {
            if v >= t {
                return DMatrix::zeros(2, 2);
            }
            let inner = simpson(|u| (&s11 * (t - u)).exp() * &s12 * (&s22 * (u - v)).exp(), v, t, 64);
            inner * &s21 * h(v)
        },
        0.0,
        t,
        64,
    );
    (&s11 * t).exp() + outer
}

fn corner_block_identity() -> Result<Outcome> {
    let mut r = rng(4_040);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let data: Vec<f64> = (0..16).map(|_| r.random_range(-1.0..1.0)).collect();
        let s = DenseMatrix::from_vec(4, 4, data)?;
        let h = corner_block(&s, 2, 1.0)?;
        worst = worst.max(max_abs_diff(&to_na(&h), &renewal_rhs(&to_na(&s), 1.0)));
    }
    outcome(worst <= 1e-6, format!("worst renewal-equation residual {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("scalar exactness", scalar_exactness),
        ("residual certificates", residual_certificates),
        ("dual-route agreement", dual_route),
        ("expansion orders", expansion_orders),
        ("density morphing", density_morphing),
        ("mgf convergence", mgf_convergence),
        ("spectral splitting", spectral_splitting),
        ("Monte Carlo concordance", monte_carlo),
        ("fluid closed forms", fluid_closed_forms),
        ("corner-block identity", corner_block_identity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !passed as usize;
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1} s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
