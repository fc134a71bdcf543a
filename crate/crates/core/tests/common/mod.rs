#![allow(dead_code)]

use fluid_morph::matrix::DenseMatrix;
use fluid_morph::model::MmbmModel;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn m1() -> MmbmModel<f64> {
    MmbmModel::from_f64(&[&[0.0]], &[-1.0], &[2.0]).unwrap()
}

pub fn m2() -> MmbmModel<f64> {
    MmbmModel::from_f64(&[&[-1.0, 1.0], &[1.0, -1.0]], &[1.0, -2.0], &[1.0, 1.0]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Irreducible generator with rates in `[0.1, 2]` on a cycle plus random
/// extra edges, variances in `[0.25, 4]`, drifts in `[-3, 3]` shifted so
/// that the mean drift is at most `-0.1`.
pub fn random_model(rng: &mut ChaCha8Rng, m: usize) -> MmbmModel<f64> {
    let mut q = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let on_cycle = j == (i + 1) % m;
            if i != j && (on_cycle || rng.random_bool(0.6)) {
                q[i][j] = rng.random_range(0.1..2.0);
            }
        }
        q[i][i] = -q[i].iter().sum::<f64>();
    }
    let sigma2: Vec<f64> = (0..m).map(|_| rng.random_range(0.25..4.0)).collect();
    let mu: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
    let rows: Vec<&[f64]> = q.iter().map(|r| r.as_slice()).collect();
    let model = MmbmModel::from_f64(&rows, &mu, &sigma2).unwrap();
    let drift = model.mean_drift();
    if drift <= -0.1 {
        return model;
    }
    let shift = drift + rng.random_range(0.1..1.0);
    model.with_mu(mu.iter().map(|u| u - shift).collect()).unwrap()
}

/// 100 models with `m` cycling through 1..=6.
pub fn model_suite() -> Vec<MmbmModel<f64>> {
    let mut r = rng(20_240_611);
    (0..100).map(|i| random_model(&mut r, 1 + i % 6)).collect()
}

pub fn to_na(a: &DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn from_na(a: &DMatrix<f64>) -> DenseMatrix<f64> {
    DenseMatrix::from_rows(&a.row_iter().map(|r| r.iter().copied().collect()).collect::<Vec<_>>()).unwrap()
}

pub fn na_expm(a: &DenseMatrix<f64>) -> DMatrix<f64> {
    to_na(a).exp()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> DMatrix<f64>, a: f64, b: f64, n: usize) -> DMatrix<f64> {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + k as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * NODES.iter().zip(WEIGHTS).map(|(&x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// `∫₀^reach f` over geometrically graded pieces starting at `first`.
pub fn graded_integral(f: impl Fn(f64) -> f64, first: f64, reach: f64) -> f64 {
    let mut total = gauss5(&f, 0.0, first);
    let mut a = first;
    while a < reach {
        let b = (a * 1.1).min(reach);
        total += gauss5(&f, a, b);
        a = b;
    }
    total
}
