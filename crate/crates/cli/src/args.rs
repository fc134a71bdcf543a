use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fluid_morph::mcsim::{SimConfig, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "fluid-morph", version, about = "Stationary laws of reflected MMBM and their fluid approximations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limit matrices, certificates and stationary density of an MMBM.
    Solve(RunConfig),
    /// Stationary law of a fluid queue, given directly or as the approximation at one λ.
    Fluid(RunConfig),
    /// Convergence of the fluid approximations along a λ grid.
    Morph(RunConfig),
    /// Monte Carlo sample of the stationary law with its KS distance to the analytic CDF.
    Simulate(RunConfig),
    /// Runs the invariant suite and prints a pass/fail table.
    Check(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// MMBM model file (JSON with m, Q, mu, sigma2).
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Fluid model file (JSON with T and c, positive rates first).
    #[arg(long)]
    pub fluid_model: Option<PathBuf>,

    /// Approximation intensity; repeat or comma-separate for a grid.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,

    /// Largest level of the output grid [default: 20 / |spectral abscissa|].
    #[arg(long)]
    pub xmax: Option<f64>,

    /// Number of levels in the output grid.
    #[arg(long, default_value_t = 200)]
    pub points: usize,

    /// Bound on relative residuals of the limit matrices.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Recorded samples per Monte Carlo run [default: 1000000].
    #[arg(long)]
    pub samples: Option<usize>,

    /// Simulated time per Monte Carlo run [default: 100000].
    #[arg(long)]
    pub horizon: Option<f64>,

    /// Euler step of the MMBM simulator.
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,

    /// Directory receiving every artifact; without it the primary artifact goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Format of the artifact printed to stdout.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl RunConfig {
    pub fn sim_config(&self) -> SimConfig {
        let base = SimConfig::default();
        SimConfig {
            horizon: self.horizon.unwrap_or(base.horizon),
            dt: self.dt,
            seed: self.seed,
            samples: self.samples.unwrap_or(base.samples),
            ..base
        }
    }

    /// Monte Carlo runs in `check` only when a budget is given.
    pub fn wants_simulation(&self) -> bool {
        self.samples.is_some() || self.horizon.is_some()
    }
}
