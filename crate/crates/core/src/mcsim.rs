//! Monte Carlo estimates of stationary laws of reflected processes.
//!
//! Streams use ChaCha8 seeded with `seed + replication`. MMBM paths use an
//! Euler scheme with reflection `max(0, ·)` after every sub-step; fluid paths
//! are simulated exactly between phase jumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{FluidModel, MmbmModel};
use crate::scalar::Scalar;

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    /// Largest Euler sub-step (ignored by the exact fluid simulator).
    pub dt: f64,
    pub seed: u64,
    /// Fraction of each replication discarded before sampling.
    pub burn_in: f64,
    /// Number of samples recorded per replication, equally spaced after burn-in.
    pub samples: usize,
    pub replications: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 1e5,
            dt: 1e-4,
            seed: DEFAULT_SEED,
            burn_in: 0.1,
            samples: 1_000_000,
            replications: 1,
        }
    }
}

impl SimConfig {
    fn validate(&self, needs_dt: bool) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {}", self.horizon)));
        }
        if needs_dt && (!(self.dt > 0.0) || !self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::InvalidArgument(format!("burn-in fraction must lie in [0, 1), got {}", self.burn_in)));
        }
        if self.samples == 0 || self.replications == 0 {
            return Err(Error::InvalidArgument("need at least one sample and one replication".into()));
        }
        Ok(())
    }

    fn start(&self) -> f64 {
        self.burn_in * self.horizon
    }

    fn interval(&self) -> f64 {
        (self.horizon - self.start()) / self.samples as f64
    }
}

/// Stationary samples of a reflected process, `(phase, level)` in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    /// Sorted levels per phase.
    pub per_phase: Vec<Vec<f64>>,
    /// Samples in time order, replications concatenated by index.
    pub trace: Vec<(usize, f64)>,
    pub burn_in: f64,
    pub seed: u64,
}

impl EmpiricalCdf {
    fn from_trace(trace: Vec<(usize, f64)>, phases: usize, burn_in: f64, seed: u64) -> Self {
        let mut per_phase = vec![Vec::new(); phases];
        for &(p, x) in &trace {
            per_phase[p].push(x);
        }
        for v in &mut per_phase {
            v.sort_by(f64::total_cmp);
        }
        Self {
            per_phase,
            trace,
            burn_in,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }

    pub fn phases(&self) -> usize {
        self.per_phase.len()
    }

    /// Fraction of samples in each phase.
    pub fn occupancy(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.per_phase.iter().map(|v| v.len() as f64 / n).collect()
    }

    /// Fraction of samples at level exactly zero, per phase.
    pub fn mass_zero(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.per_phase
            .iter()
            .map(|v| v.partition_point(|&x| x <= 0.0) as f64 / n)
            .collect()
    }

    /// Empirical `P(level ≤ x, phase = j)`.
    pub fn cdf(&self, x: f64) -> Vec<f64> {
        let n = self.len() as f64;
        self.per_phase
            .iter()
            .map(|v| v.partition_point(|&y| y <= x) as f64 / n)
            .collect()
    }

    /// All levels, sorted.
    pub fn levels(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.trace.iter().map(|s| s.1).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Mean of `f` over the trace with a batch-means standard error.
    pub fn batch_mean(&self, batches: usize, f: impl Fn(usize, f64) -> f64) -> Result<(f64, f64)> {
        if batches < 2 || self.len() < batches {
            return Err(Error::InvalidArgument(format!(
                "{} samples cannot form {batches} batches",
                self.len()
            )));
        }
        let size = self.len() / batches;
        let means: Vec<f64> = (0..batches)
            .map(|b| {
                let chunk = &self.trace[b * size..(b + 1) * size];
                chunk.iter().map(|&(p, x)| f(p, x)).sum::<f64>() / size as f64
            })
            .collect();
        let mean = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        Ok((mean, (var / batches as f64).sqrt()))
    }

    /// `phase,level` rows in time order.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * self.len() + 16);
        out.push_str("phase,level\n");
        for &(p, x) in &self.trace {
            out.push_str(&format!("{},{:.16e}\n", p + 1, x));
        }
        out
    }
}

struct Jumps {
    rates: Vec<f64>,
    cumulative: Vec<Vec<f64>>,
}

impl Jumps {
    fn new(q: &[Vec<f64>]) -> Self {
        let rates: Vec<f64> = q.iter().enumerate().map(|(i, r)| -r[i]).collect();
        let cumulative = q
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut acc = 0.0;
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        if j != i {
                            acc += v / rates[i];
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { rates, cumulative }
    }

    fn sojourn(&self, i: usize, rng: &mut ChaCha8Rng) -> f64 {
        if self.rates[i] > 0.0 {
            let e: f64 = rng.sample(Exp1);
            e / self.rates[i]
        } else {
            f64::INFINITY
        }
    }

    fn next(&self, i: usize, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let row = &self.cumulative[i];
        row.iter()
            .enumerate()
            .find(|&(j, &c)| j != i && u < c)
            .map(|(j, _)| j)
            .unwrap_or_else(|| (0..row.len()).rev().find(|&j| j != i && row[j] > 0.0).unwrap_or(i))
    }
}

fn run_replications<F>(cfg: &SimConfig, phases: usize, one: F) -> EmpiricalCdf
where
    F: Fn(&mut ChaCha8Rng) -> Vec<(usize, f64)> + Sync,
{
    let traces: Vec<Vec<(usize, f64)>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            one(&mut rng)
        })
        .collect();
    EmpiricalCdf::from_trace(traces.concat(), phases, cfg.burn_in, cfg.seed)
}

/// Reflected MMBM by Euler sub-steps `Ŷ ← max(0, Ŷ + μᵢh + σᵢ√h ξ)`, `h ≤ dt`,
/// with exact exponential phase sojourns.
pub fn simulate_mmbm<T: Scalar>(model: &MmbmModel<T>, cfg: &SimConfig) -> Result<EmpiricalCdf> {
    cfg.validate(true)?;
    let q: Vec<Vec<f64>> = model.q().to_f64_rows();
    let mu: Vec<f64> = model.mu().iter().map(|x| x.as_f64()).collect();
    let sigma: Vec<f64> = model.sigma().iter().map(|x| x.as_f64()).collect();
    let jumps = Jumps::new(&q);
    let (start, interval) = (cfg.start(), cfg.interval());
    Ok(run_replications(cfg, model.m(), |rng| {
        let mut out = Vec::with_capacity(cfg.samples);
        let (mut t, mut level, mut phase) = (0.0f64, 0.0f64, 0usize);
        let mut k = 0usize;
        let mut next_sample = start + interval;
        while k < cfg.samples {
            let end = (t + jumps.sojourn(phase, rng)).min(cfg.horizon);
            let (drift, vol) = (mu[phase], sigma[phase]);
            while t < end && k < cfg.samples {
                let h = cfg.dt.min(end - t);
                let xi: f64 = rng.sample(StandardNormal);
                level = (level + drift * h + vol * h.sqrt() * xi).max(0.0);
                t += h;
                while next_sample <= t && k < cfg.samples {
                    out.push((phase, level));
                    k += 1;
                    next_sample = start + interval * (k + 1) as f64;
                }
            }
            if t >= cfg.horizon {
                break;
            }
            phase = jumps.next(phase, rng);
        }
        out
    }))
}

/// Reflected fluid queue, exact: the level moves linearly between phase
/// jumps and sticks at zero while the rate is negative.
pub fn simulate_fluid<T: Scalar>(fm: &FluidModel<T>, cfg: &SimConfig) -> Result<EmpiricalCdf> {
    cfg.validate(false)?;
    let q = fm.t().to_f64_rows();
    let rates: Vec<f64> = fm.rates().iter().map(|x| x.as_f64()).collect();
    let jumps = Jumps::new(&q);
    let (start, interval) = (cfg.start(), cfg.interval());
    Ok(run_replications(cfg, rates.len(), |rng| {
        let mut out = Vec::with_capacity(cfg.samples);
        let (mut t, mut level, mut phase) = (0.0f64, 0.0f64, 0usize);
        let mut k = 0usize;
        let mut next_sample = start + interval;
        while k < cfg.samples {
            let end = (t + jumps.sojourn(phase, rng)).min(cfg.horizon);
            let c = rates[phase];
            while next_sample <= end && k < cfg.samples {
                out.push((phase, (level + c * (next_sample - t)).max(0.0)));
                k += 1;
                next_sample = start + interval * (k + 1) as f64;
            }
            level = (level + c * (end - t)).max(0.0);
            t = end;
            if t >= cfg.horizon {
                break;
            }
            phase = jumps.next(phase, rng);
        }
        out
    }))
}

/// Kolmogorov–Smirnov distance between the empirical level marginal and an
/// analytic joint distribution function (summed over phases), evaluated on
/// both sides of every distinct sample point. The analytic law may carry an
/// atom at zero; its left limit at zero is taken as 0.
pub fn ks_distance(emp: &EmpiricalCdf, analytic_cdf: impl Fn(f64) -> Result<Vec<f64>>) -> Result<f64> {
    if emp.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let levels = emp.levels();
    let n = levels.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < levels.len() {
        let x = levels[i];
        let mut j = i;
        while j < levels.len() && levels[j] == x {
            j += 1;
        }
        let f: f64 = analytic_cdf(x)?.iter().sum();
        let f_left = if x <= 0.0 { 0.0 } else { f };
        sup = sup.max((j as f64 / n - f).abs()).max((i as f64 / n - f_left).abs());
        i = j;
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    fn m1() -> MmbmModel<f64> {
        MmbmModel::from_f64(&[&[0.0]], &[-1.0], &[2.0]).unwrap()
    }

    fn f1() -> FluidModel<f64> {
        FluidModel::new(
            DenseMatrix::from_f64_rows(&[&[-2.0, 2.0], &[1.0, -1.0]]),
            vec![1.0],
            vec![-1.0],
        )
        .unwrap()
    }

    fn small() -> SimConfig {
        SimConfig {
            horizon: 2000.0,
            dt: 1e-3,
            samples: 20_000,
            ..SimConfig::default()
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = simulate_mmbm(&m1(), &small()).unwrap();
        let b = simulate_mmbm(&m1(), &small()).unwrap();
        assert_eq!(a, b);
        let c = simulate_mmbm(&m1(), &SimConfig { seed: 7, ..small() }).unwrap();
        assert_ne!(a, c);
        let f = simulate_fluid(&f1(), &small()).unwrap();
        assert_eq!(f, simulate_fluid(&f1(), &small()).unwrap());
    }

    #[test]
    fn counts_and_nonnegativity() {
        let e = simulate_fluid(&f1(), &small()).unwrap();
        assert_eq!(e.len(), 20_000);
        assert_eq!(e.per_phase.iter().map(Vec::len).sum::<usize>(), e.len());
        assert!(e.trace.iter().all(|s| s.1 >= 0.0));
        // ascending phase never sits at zero
        assert_eq!(e.mass_zero()[0], 0.0);
    }

    #[test]
    fn fluid_occupancy_and_atom() {
        let cfg = SimConfig {
            horizon: 2e4,
            samples: 200_000,
            ..SimConfig::default()
        };
        let e = simulate_fluid(&f1(), &cfg).unwrap();
        let (occ, se) = e.batch_mean(50, |p, _| (p == 0) as u8 as f64).unwrap();
        assert!((occ - 1.0 / 3.0).abs() < 4.0 * se + 1e-3, "{occ} {se}");
        let (atom, se) = e.batch_mean(50, |p, x| (p == 1 && x == 0.0) as u8 as f64).unwrap();
        assert!((atom - 1.0 / 3.0).abs() < 4.0 * se + 1e-3, "{atom} {se}");
    }

    #[test]
    fn ks_on_degenerate_samples() {
        let xs: Vec<(usize, f64)> = (1..=1000).map(|k| (0, k as f64 / 1000.0)).collect();
        let e = EmpiricalCdf::from_trace(xs, 1, 0.0, 0);
        let uniform = |x: f64| Ok(vec![x.clamp(0.0, 1.0)]);
        assert!(ks_distance(&e, uniform).unwrap() <= 1e-3 + 1e-12);
        let shifted = |x: f64| Ok(vec![(x - 0.05).clamp(0.0, 1.0)]);
        assert!((ks_distance(&e, shifted).unwrap() - 0.05).abs() < 2e-3);
        let empty = EmpiricalCdf::from_trace(vec![], 1, 0.0, 0);
        assert!(ks_distance(&empty, uniform).is_err());
    }

    #[test]
    fn ks_counts_atom_at_zero() {
        let mut xs: Vec<(usize, f64)> = vec![(1, 0.0); 500];
        xs.extend((1..=500).map(|k| (0, k as f64 / 500.0)));
        let e = EmpiricalCdf::from_trace(xs, 2, 0.0, 0);
        let law = |x: f64| Ok(vec![0.5 * x.clamp(0.0, 1.0), 0.5]);
        assert!(ks_distance(&e, law).unwrap() <= 2e-3);
    }

    #[test]
    fn invalid_configs() {
        assert!(simulate_mmbm(&m1(), &SimConfig { dt: 0.0, ..small() }).is_err());
        assert!(simulate_mmbm(&m1(), &SimConfig { horizon: -1.0, ..small() }).is_err());
        assert!(simulate_fluid(&f1(), &SimConfig { burn_in: 1.0, ..small() }).is_err());
    }

    #[test]
    fn csv_dump() {
        let e = simulate_fluid(&f1(), &SimConfig { samples: 3, ..small() }).unwrap();
        let csv = e.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("phase,level\n"));
    }
}
