use std::fs;
use std::path::Path;

use fluid_morph::check::{run_checks, CheckOptions, CheckResult};
use fluid_morph::fluid::{fluid_cdf, fluid_density, fluid_mass_zero, fluid_stationary};
use fluid_morph::mcsim::{ks_distance, simulate_fluid, simulate_mmbm};
use fluid_morph::mmbm::{certificates, crosscheck, mmbm_cdf, mmbm_density, mmbm_stationary, Certificate, CrossCheck};
use fluid_morph::model::{fluidize, load_fluid_model, load_model, FluidModel, MmbmModel};
use fluid_morph::morph::{default_x_grid, density_convergence, expansion_report, log_grid, mgf_report, ConvergenceReport};
use fluid_morph::numerics::eigenvalues;
use fluid_morph::{Error, Matrix};
use serde::Serialize;

use crate::args::RunConfig;
use crate::output::{level_table, to_json, Artifacts};
use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Read(path.to_path_buf(), e))
}

fn mmbm_model(cfg: &RunConfig) -> Result<MmbmModel<f64>, CliError> {
    let path = cfg.model.as_ref().ok_or_else(|| CliError::Usage("--model is required".into()))?;
    Ok(load_model(&read(path)?)?)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_f64_rows()
}

/// `points` equispaced levels `x_max·i/points`, `i = 1..=points`.
fn level_grid(x_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(x_max > 0.0) || !x_max.is_finite() {
        return Err(Error::InvalidArgument(format!("xmax must be positive, got {x_max}")).into());
    }
    if points == 0 {
        return Err(Error::InvalidArgument("points must be positive".into()).into());
    }
    Ok((1..=points).map(|i| x_max * i as f64 / points as f64).collect())
}

fn spectral_reach(k: &Matrix) -> Result<f64, CliError> {
    let a = eigenvalues(k)?.iter().fold(f64::NEG_INFINITY, |a, e| a.max(e.re));
    Ok(20.0 / a.abs())
}

#[derive(Serialize)]
struct SolveSummary {
    m: usize,
    psi1: Vec<Vec<f64>>,
    psi1_star: Vec<Vec<f64>>,
    k0: Vec<Vec<f64>>,
    k0_star: Vec<Vec<f64>>,
    zeta1: Vec<f64>,
    tol: f64,
    certificates_passed: bool,
    certificates: Vec<Certificate>,
    crosscheck: CrossCheck,
    xmax: f64,
    points: usize,
}

pub fn solve(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let model = mmbm_model(cfg)?;
    let st = mmbm_stationary(&model)?;
    let x_max = match cfg.xmax {
        Some(x) => x,
        None => 20.0 / st.spectral_abscissa()?.abs(),
    };
    let xs = level_grid(x_max, cfg.points)?;
    let certs = certificates(&st)?;
    let summary = SolveSummary {
        m: model.m(),
        psi1: rows(&st.psi1),
        psi1_star: rows(&st.psi1_star),
        k0: rows(&st.k0),
        k0_star: rows(&st.k0_star),
        zeta1: st.zeta1.clone(),
        tol: cfg.tol,
        certificates_passed: certs.iter().all(|c| c.passed(cfg.tol)),
        certificates: certs,
        crosscheck: crosscheck(&st, x_max, cfg.points.max(2))?,
        xmax: x_max,
        points: cfg.points,
    };
    let density: Vec<Vec<f64>> = xs.iter().map(|&x| mmbm_density(&st, x)).collect::<Result<_, _>>()?;
    let cdf: Vec<Vec<f64>> = xs.iter().map(|&x| mmbm_cdf(&st, x)).collect::<Result<_, _>>()?;
    Ok(Artifacts::default()
        .csv("density.csv", level_table(&xs, &density, &cdf))
        .json("summary.json", &summary))
}

fn fluid_input(cfg: &RunConfig) -> Result<(FluidModel<f64>, Option<f64>), CliError> {
    match (&cfg.fluid_model, &cfg.model) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --fluid-model or --model, not both".into())),
        (Some(path), None) => {
            if !cfg.lambda.is_empty() {
                return Err(CliError::Usage("--lambda applies to --model only".into()));
            }
            Ok((load_fluid_model(&read(path)?)?, None))
        }
        (None, Some(_)) => {
            let model = mmbm_model(cfg)?;
            match cfg.lambda.as_slice() {
                [lambda] => Ok((fluidize(&model, *lambda)?, Some(*lambda))),
                _ => Err(Error::InvalidArgument(format!(
                    "fluid needs exactly one lambda, got {}",
                    cfg.lambda.len()
                ))
                .into()),
            }
        }
        (None, None) => Err(CliError::Usage("--model or --fluid-model is required".into())),
    }
}

#[derive(Serialize)]
struct FluidSummary {
    lambda: Option<f64>,
    n_plus: usize,
    n_minus: usize,
    psi: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    zeta: Vec<f64>,
    mass_zero: Vec<f64>,
    warning: Option<String>,
    xmax: f64,
    points: usize,
}

pub fn fluid(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let (fm, lambda) = fluid_input(cfg)?;
    let st = fluid_stationary(&fm)?;
    let x_max = match cfg.xmax {
        Some(x) => x,
        None => spectral_reach(&st.k)?,
    };
    let xs = level_grid(x_max, cfg.points)?;
    let density: Vec<Vec<f64>> = xs.iter().map(|&x| fluid_density(&st, x)).collect::<Result<_, _>>()?;
    let cdf: Vec<Vec<f64>> = xs.iter().map(|&x| fluid_cdf(&st, x)).collect::<Result<_, _>>()?;
    let summary = FluidSummary {
        lambda,
        n_plus: fm.n_plus(),
        n_minus: fm.n_minus(),
        psi: rows(&st.psi),
        k: rows(&st.k),
        zeta: st.zeta.clone(),
        mass_zero: fluid_mass_zero(&st),
        warning: st.warning.clone(),
        xmax: x_max,
        points: cfg.points,
    };
    Ok(Artifacts::default()
        .csv("density.csv", level_table(&xs, &density, &cdf))
        .json("summary.json", &summary))
}

/// Arguments of the moment generating function swept by `morph`.
const MGF_ARGUMENTS: [f64; 3] = [0.0, 0.25, 0.5];

#[derive(Serialize)]
struct MorphSummary {
    expansion: ConvergenceReport,
    density: ConvergenceReport,
    mgf: ConvergenceReport,
}

pub fn morph(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let model = mmbm_model(cfg)?;
    if cfg.lambda.is_empty() {
        return Err(Error::InvalidArgument("morph needs at least one lambda".into()).into());
    }
    let st = mmbm_stationary(&model)?;
    let grid = match cfg.xmax {
        Some(x) if x > 1e-3 => log_grid(1e-3, x, cfg.points.max(1)),
        Some(x) => return Err(Error::InvalidArgument(format!("xmax must exceed 1e-3, got {x}")).into()),
        None => default_x_grid(&st)?,
    };
    let eps: Vec<f64> = cfg.lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let summary = MorphSummary {
        density: density_convergence(&model, &cfg.lambda, &grid)?,
        mgf: mgf_report(&model, &cfg.lambda, &MGF_ARGUMENTS, 1.0)?,
        expansion: expansion_report(&model, &eps)?,
    };
    let mut csv = summary.expansion.to_csv();
    for r in [&summary.density, &summary.mgf] {
        csv.push_str(r.to_csv().split_once('\n').map_or("", |(_, body)| body));
    }
    Ok(Artifacts::default().csv("report.csv", csv).json("report.json", &summary))
}

#[derive(Serialize)]
struct SimulationSummary {
    simulator: &'static str,
    samples: usize,
    horizon: f64,
    dt: Option<f64>,
    seed: u64,
    ks_distance: f64,
    mass_zero: Vec<f64>,
    occupancy: Vec<f64>,
}

pub fn simulate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let sim = cfg.sim_config();
    let (emp, ks, simulator, dt) = match (&cfg.fluid_model, &cfg.model) {
        (Some(path), None) => {
            let fm: FluidModel<f64> = load_fluid_model(&read(path)?)?;
            let st = fluid_stationary(&fm)?;
            let emp = simulate_fluid(&fm, &sim)?;
            let ks = ks_distance(&emp, |x| fluid_cdf(&st, x))?;
            (emp, ks, "fluid-exact", None)
        }
        (None, Some(_)) => {
            let model = mmbm_model(cfg)?;
            let st = mmbm_stationary(&model)?;
            let emp = simulate_mmbm(&model, &sim)?;
            let ks = ks_distance(&emp, |x| mmbm_cdf(&st, x))?;
            (emp, ks, "mmbm-euler", Some(sim.dt))
        }
        _ => return Err(CliError::Usage("give exactly one of --model and --fluid-model".into())),
    };
    let summary = SimulationSummary {
        simulator,
        samples: emp.len(),
        horizon: sim.horizon,
        dt,
        seed: sim.seed,
        ks_distance: ks,
        mass_zero: emp.mass_zero(),
        occupancy: emp.occupancy(),
    };
    Ok(Artifacts::default()
        .csv("samples.csv", emp.to_csv())
        .json("summary.json", &summary))
}

/// Pass/fail table and whether every check passed.
pub fn check(cfg: &RunConfig) -> Result<(Artifacts, bool), CliError> {
    let model = mmbm_model(cfg)?;
    let mut opts = CheckOptions {
        residual_tol: cfg.tol,
        ..CheckOptions::default()
    };
    if !cfg.lambda.is_empty() {
        opts.lambdas = cfg.lambda.clone();
    }
    if cfg.wants_simulation() {
        opts.simulation = Some(cfg.sim_config());
    }
    let results = run_checks(&model, &opts)?;
    let passed = results.iter().all(|r| r.passed);
    let table = render_table(&results);
    let artifacts = Artifacts {
        files: vec![("checks.txt".into(), table.clone()), ("checks.json".into(), to_json(&results))],
        primary_csv: Some(table),
        primary_json: Some(to_json(&results)),
    };
    Ok((artifacts, passed))
}

fn render_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        out.push_str(&format!(
            "{} {:width$}  value {:.3e}  bound {:.3e}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.bound
        ));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!("{} checks, {failed} failed\n", results.len()));
    out
}
