//! Markov-modulated Brownian motion and fluid-queue models, and the
//! duplicated-phase fluid family that approximates an MMBM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::numerics::left_null_vector;
use crate::scalar::Scalar;

/// Absolute tolerance on generator row sums.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// Checks that `q` is a generator and returns a copy whose diagonal has been
/// adjusted so that rows sum to zero exactly.
pub fn validate_generator<T: Scalar>(q: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !q.is_square() {
        return Err(Error::Dimension(format!(
            "generator must be square, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    if q.rows() == 0 {
        return Err(Error::Dimension("generator has no phases".into()));
    }
    let n = q.rows();
    let mut out = q.clone();
    for i in 0..n {
        for j in 0..n {
            if i != j && q[(i, j)] < T::zero() {
                return Err(Error::NotGenerator(format!(
                    "negative off-diagonal entry {} at ({i}, {j})",
                    q[(i, j)]
                )));
            }
        }
        let sum: T = q.row(i).iter().copied().sum();
        if sum.abs() > T::c(ROW_SUM_TOL) {
            return Err(Error::NotGenerator(format!("row {i} sums to {sum}")));
        }
        let off: T = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
        out[(i, i)] = -off;
    }
    Ok(out)
}

/// Strong connectivity of the nonzero off-diagonal pattern.
pub fn is_irreducible<T: Scalar>(q: &DenseMatrix<T>) -> bool {
    let n = q.rows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { q[(i, j)] } else { q[(j, i)] };
                if j != i && w != T::zero() && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    n <= 1 || (reach(true) && reach(false))
}

/// Stationary distribution `α` of an irreducible generator: `αQ = 0`, `α1 = 1`.
pub fn stationary_phase_dist<T: Scalar>(q: &DenseMatrix<T>) -> Result<Vec<T>> {
    let q = validate_generator(q)?;
    if !is_irreducible(&q) {
        return Err(Error::Reducible);
    }
    let mut v = left_null_vector(&q)?;
    // round-off can leave entries like -1e-18
    for x in v.iter_mut() {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
    let s: T = v.iter().copied().sum();
    Ok(v.into_iter().map(|x| x / s).collect())
}

/// Markov-modulated Brownian motion: phase generator `Q`, drifts `μ` and
/// variances `σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmbmModel<T> {
    q: DenseMatrix<T>,
    mu: Vec<T>,
    sigma2: Vec<T>,
    sigma: Vec<T>,
    alpha: Vec<T>,
}

impl<T: Scalar> MmbmModel<T> {
    pub fn new(q: DenseMatrix<T>, mu: Vec<T>, sigma2: Vec<T>) -> Result<Self> {
        let m = q.rows();
        if mu.len() != m || sigma2.len() != m {
            return Err(Error::Dimension(format!(
                "Q is {m}x{}, mu has {} entries, sigma2 has {}",
                q.cols(),
                mu.len(),
                sigma2.len()
            )));
        }
        if let Some(i) = mu.iter().chain(&sigma2).position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i % m.max(1), col: 0 });
        }
        let q = validate_generator(&q)?;
        if let Some((phase, &value)) = sigma2.iter().enumerate().find(|(_, &s)| s <= T::zero()) {
            return Err(Error::NonPositiveVariance {
                phase,
                value: value.as_f64(),
            });
        }
        let alpha = stationary_phase_dist(&q)?;
        let sigma = sigma2.iter().map(|s| s.sqrt()).collect();
        Ok(Self {
            q,
            mu,
            sigma2,
            sigma,
            alpha,
        })
    }

    pub fn from_f64(q: &[&[f64]], mu: &[f64], sigma2: &[f64]) -> Result<Self> {
        Self::new(
            DenseMatrix::from_f64_rows(q),
            mu.iter().map(|&x| T::c(x)).collect(),
            sigma2.iter().map(|&x| T::c(x)).collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }
    pub fn q(&self) -> &DenseMatrix<T> {
        &self.q
    }
    pub fn mu(&self) -> &[T] {
        &self.mu
    }
    pub fn sigma2(&self) -> &[T] {
        &self.sigma2
    }
    /// Standard deviations, the diagonal of `Θ = √V`.
    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }
    /// `D = diag(μ)`.
    pub fn d(&self) -> DenseMatrix<T> {
        DenseMatrix::from_diag(&self.mu)
    }
    /// `V = diag(σ²)`.
    pub fn v(&self) -> DenseMatrix<T> {
        DenseMatrix::from_diag(&self.sigma2)
    }
    /// `Θ = diag(σ)`.
    pub fn theta(&self) -> DenseMatrix<T> {
        DenseMatrix::from_diag(&self.sigma)
    }

    /// `α·μ`, the long-run drift of the unreflected level.
    pub fn mean_drift(&self) -> T {
        dot(&self.alpha, &self.mu)
    }

    /// Errors unless the reflected process is positive recurrent.
    pub fn require_recurrent(&self) -> Result<()> {
        let drift = self.mean_drift();
        if drift < T::zero() {
            Ok(())
        } else {
            Err(Error::NotRecurrent {
                drift: drift.as_f64(),
            })
        }
    }

    /// Same model with drifts replaced; used by tests and sweeps.
    pub fn with_mu(&self, mu: Vec<T>) -> Result<Self> {
        Self::new(self.q.clone(), mu, self.sigma2.clone())
    }

    pub fn cast<U: Scalar>(&self) -> MmbmModel<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::c(x.as_f64())).collect::<Vec<U>>();
        MmbmModel {
            q: self.q.cast(),
            mu: conv(&self.mu),
            sigma2: conv(&self.sigma2),
            sigma: conv(&self.sigma),
            alpha: conv(&self.alpha),
        }
    }
}

/// On-disk model description: `{"m": .., "Q": [[..]], "mu": [..], "sigma2": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub m: usize,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
}

/// Parses and validates a model file.
pub fn load_model<T: Scalar>(text: &str) -> Result<MmbmModel<T>> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.q.len() != file.m || file.mu.len() != file.m || file.sigma2.len() != file.m {
        return Err(Error::Dimension(format!(
            "declared m = {} but Q has {} rows, mu {} entries, sigma2 {} entries",
            file.m,
            file.q.len(),
            file.mu.len(),
            file.sigma2.len()
        )));
    }
    let conv = |v: &[f64]| v.iter().map(|&x| T::c(x)).collect::<Vec<T>>();
    let rows: Vec<Vec<T>> = file.q.iter().map(|r| conv(r)).collect();
    MmbmModel::new(DenseMatrix::from_rows(&rows)?, conv(&file.mu), conv(&file.sigma2))
}

impl<T: Scalar> From<&MmbmModel<T>> for ModelFile {
    fn from(m: &MmbmModel<T>) -> Self {
        ModelFile {
            m: m.m(),
            q: m.q.to_f64_rows(),
            mu: m.mu.iter().map(|x| x.as_f64()).collect(),
            sigma2: m.sigma2.iter().map(|x| x.as_f64()).collect(),
        }
    }
}

/// Fluid queue with ascending phases first: generator `T` partitioned into
/// `T⁺⁺, T⁺⁻, T⁻⁺, T⁻⁻` and rates `c⁺ > 0`, `c⁻ < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidModel<T> {
    t: DenseMatrix<T>,
    c_plus: Vec<T>,
    c_minus: Vec<T>,
}

impl<T: Scalar> FluidModel<T> {
    pub fn new(t: DenseMatrix<T>, c_plus: Vec<T>, c_minus: Vec<T>) -> Result<Self> {
        let n = c_plus.len() + c_minus.len();
        if t.rows() != n || t.cols() != n {
            return Err(Error::Dimension(format!(
                "generator is {}x{} but there are {n} rates",
                t.rows(),
                t.cols()
            )));
        }
        if c_plus.is_empty() || c_minus.is_empty() {
            return Err(Error::InvalidRates(
                "need at least one ascending and one descending phase".into(),
            ));
        }
        if let Some(i) = c_plus.iter().position(|&c| !(c > T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidRates(format!("ascending rate {i} is not positive")));
        }
        if let Some(i) = c_minus.iter().position(|&c| !(c < T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidRates(format!("descending rate {i} is not negative")));
        }
        let t = validate_generator(&t)?;
        if !is_irreducible(&t) {
            return Err(Error::Reducible);
        }
        Ok(Self { t, c_plus, c_minus })
    }

    pub fn n_plus(&self) -> usize {
        self.c_plus.len()
    }
    pub fn n_minus(&self) -> usize {
        self.c_minus.len()
    }
    pub fn t(&self) -> &DenseMatrix<T> {
        &self.t
    }
    pub fn c_plus(&self) -> &[T] {
        &self.c_plus
    }
    pub fn c_minus(&self) -> &[T] {
        &self.c_minus
    }
    /// `|c⁻|` elementwise.
    pub fn abs_c_minus(&self) -> Vec<T> {
        self.c_minus.iter().map(|c| c.abs()).collect()
    }
    /// All rates in phase order.
    pub fn rates(&self) -> Vec<T> {
        self.c_plus.iter().chain(&self.c_minus).copied().collect()
    }
    pub fn t_pp(&self) -> DenseMatrix<T> {
        self.t.block(0, 0, self.n_plus(), self.n_plus())
    }
    pub fn t_pm(&self) -> DenseMatrix<T> {
        self.t.block(0, self.n_plus(), self.n_plus(), self.n_minus())
    }
    pub fn t_mp(&self) -> DenseMatrix<T> {
        self.t.block(self.n_plus(), 0, self.n_minus(), self.n_plus())
    }
    pub fn t_mm(&self) -> DenseMatrix<T> {
        self.t.block(self.n_plus(), self.n_plus(), self.n_minus(), self.n_minus())
    }

    pub fn stationary(&self) -> Result<Vec<T>> {
        stationary_phase_dist(&self.t)
    }

    /// Long-run drift `Σ p_i c_i` under the stationary phase law.
    pub fn mean_drift(&self) -> Result<T> {
        Ok(dot(&self.stationary()?, &self.rates()))
    }

    /// The level-negated model: descending phases become ascending and vice
    /// versa, so that first passages from below become passages from above.
    pub fn reversed(&self) -> Self {
        let (np, nm) = (self.n_plus(), self.n_minus());
        let mut t = DenseMatrix::zeros(np + nm, np + nm);
        t.set_block(0, 0, &self.t_mm());
        t.set_block(0, nm, &self.t_mp());
        t.set_block(nm, 0, &self.t_pm());
        t.set_block(nm, nm, &self.t_pp());
        Self {
            t,
            c_plus: self.c_minus.iter().map(|&c| -c).collect(),
            c_minus: self.c_plus.iter().map(|&c| -c).collect(),
        }
    }
}

/// On-disk fluid model: `{"T": [[..]], "c": [..]}` with every positive rate
/// listed before every negative one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidModelFile {
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

pub fn load_fluid_model<T: Scalar>(text: &str) -> Result<FluidModel<T>> {
    let file: FluidModelFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n_plus = file.c.iter().take_while(|&&c| c > 0.0).count();
    if file.c[n_plus..].iter().any(|&c| c >= 0.0) {
        return Err(Error::InvalidRates(
            "rates must be nonzero and list all positive rates before the negative ones".into(),
        ));
    }
    let rows: Vec<Vec<T>> = file
        .t
        .iter()
        .map(|r| r.iter().map(|&x| T::c(x)).collect())
        .collect();
    let rates: Vec<T> = file.c.iter().map(|&x| T::c(x)).collect();
    FluidModel::new(
        DenseMatrix::from_rows(&rows)?,
        rates[..n_plus].to_vec(),
        rates[n_plus..].to_vec(),
    )
}

/// Duplicated-phase fluid approximation of an MMBM at intensity `λ`.
///
/// The phase space is `{1, 2} × {1..m}`, copy 1 first. Both copies move
/// according to `Q` and swap copy at rate `λ`; copy 1 has rates `μ + √λ σ`
/// and copy 2 has rates `μ − √λ σ`.
pub fn fluidize<T: Scalar>(model: &MmbmModel<T>, lambda: T) -> Result<FluidModel<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let root = lambda.sqrt();
    for (i, (&mu, &sigma2)) in model.mu().iter().zip(model.sigma2()).enumerate() {
        if !(lambda * sigma2 > mu * mu) {
            return Err(Error::InadmissibleLambda {
                lambda: lambda.as_f64(),
                phase: i,
            });
        }
    }
    let m = model.m();
    let diag = model.q().add_diag(-lambda);
    let swap = DenseMatrix::identity(m).scale(lambda);
    let t = DenseMatrix::from_blocks(&diag, &swap, &swap, &diag);
    let c_plus = model.mu().iter().zip(model.sigma()).map(|(&u, &s)| u + root * s).collect();
    let c_minus = model.mu().iter().zip(model.sigma()).map(|(&u, &s)| u - root * s).collect();
    FluidModel::new(t, c_plus, c_minus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1() -> MmbmModel<f64> {
        MmbmModel::from_f64(&[&[0.0]], &[-1.0], &[2.0]).unwrap()
    }

    fn m2() -> MmbmModel<f64> {
        MmbmModel::from_f64(&[&[-1.0, 1.0], &[1.0, -1.0]], &[1.0, -2.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn stationary_examples() {
        let a = stationary_phase_dist(&DenseMatrix::<f64>::from_f64_rows(&[&[-1.0, 1.0], &[1.0, -1.0]])).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-15 && (a[1] - 0.5).abs() < 1e-15);
        let a = stationary_phase_dist(&DenseMatrix::<f64>::from_f64_rows(&[&[0.0]])).unwrap();
        assert_eq!(a, vec![1.0]);
        let a = stationary_phase_dist(&DenseMatrix::<f64>::from_f64_rows(&[&[-2.0, 2.0], &[1.0, -1.0]])).unwrap();
        assert!((a[0] - 1.0 / 3.0).abs() < 1e-15 && (a[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reducible_generator_rejected() {
        let q = DenseMatrix::<f64>::from_f64_rows(&[&[-1.0, 1.0, 0.0], &[0.0, -1.0, 1.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(stationary_phase_dist(&q), Err(Error::Reducible));
    }

    #[test]
    fn mean_drift_examples() {
        assert!((m2().mean_drift() + 0.5).abs() < 1e-15);
        assert!((m1().mean_drift() + 1.0).abs() < 1e-15);
        let up = m2().with_mu(vec![2.0, -1.0]).unwrap();
        assert!((up.mean_drift() - 0.5).abs() < 1e-15);
        assert!(matches!(up.require_recurrent(), Err(Error::NotRecurrent { .. })));
    }

    #[test]
    fn load_model_round_trip() {
        let text = r#"{"m": 2, "Q": [[-1, 1], [1, -1]], "mu": [1, -2], "sigma2": [1, 1]}"#;
        let m: MmbmModel<f64> = load_model(text).unwrap();
        assert_eq!(m, m2());
        assert!((m.alpha()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn load_model_errors() {
        let bad_row = r#"{"m": 2, "Q": [[-1, 1.1], [1, -1]], "mu": [1, -2], "sigma2": [1, 1]}"#;
        assert!(matches!(load_model::<f64>(bad_row), Err(Error::NotGenerator(_))));
        let zero_var = r#"{"m": 2, "Q": [[-1, 1], [1, -1]], "mu": [1, -2], "sigma2": [1, 0]}"#;
        assert!(matches!(
            load_model::<f64>(zero_var),
            Err(Error::NonPositiveVariance { phase: 1, .. })
        ));
        let unknown = r#"{"m": 1, "Q": [[0]], "mu": [-1], "sigma2": [2], "extra": 1}"#;
        assert!(matches!(load_model::<f64>(unknown), Err(Error::Parse(_))));
        let dims = r#"{"m": 2, "Q": [[0]], "mu": [-1], "sigma2": [2]}"#;
        assert!(matches!(load_model::<f64>(dims), Err(Error::Dimension(_))));
        let reducible = r#"{"m": 2, "Q": [[0, 0], [1, -1]], "mu": [-1, 1], "sigma2": [1, 1]}"#;
        assert_eq!(load_model::<f64>(reducible), Err(Error::Reducible));
        assert!(matches!(load_model::<f64>("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn row_sums_within_tolerance_are_renormalized() {
        let q = DenseMatrix::<f64>::from_f64_rows(&[&[-1.0 + 5e-11, 1.0], &[1.0, -1.0]]);
        let m = MmbmModel::new(q, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(m.q().row_sums(), vec![0.0, 0.0]);
    }

    #[test]
    fn fluidize_m1() {
        let f = fluidize(&m1(), 8.0).unwrap();
        assert_eq!(f.t(), &DenseMatrix::from_f64_rows(&[&[-8.0, 8.0], &[8.0, -8.0]]));
        assert!((f.c_plus()[0] - 3.0).abs() < 1e-15);
        assert!((f.c_minus()[0] + 5.0).abs() < 1e-15);
    }

    #[test]
    fn fluidize_m2() {
        let f = fluidize(&m2(), 100.0).unwrap();
        assert_eq!(f.t_pp(), m2().q().add_diag(-100.0));
        assert_eq!(f.t_pm(), DenseMatrix::identity(2).scale(100.0));
        assert_eq!(f.t_mp(), DenseMatrix::identity(2).scale(100.0));
        assert_eq!(f.c_plus(), &[11.0, 8.0]);
        assert_eq!(f.c_minus(), &[-9.0, -12.0]);
    }

    #[test]
    fn fluidize_threshold_is_strict() {
        assert_eq!(
            fluidize(&m1(), 0.5),
            Err(Error::InadmissibleLambda { lambda: 0.5, phase: 0 })
        );
    }

    #[test]
    fn fluid_drift_and_stationary_match_mmbm() {
        for &lambda in &[5.0, 10.0, 1e3] {
            let f = fluidize(&m2(), lambda).unwrap();
            let p = f.stationary().unwrap();
            for (k, &pk) in p.iter().enumerate() {
                assert!((pk - 0.25).abs() < 1e-13, "phase {k}");
            }
            assert!((f.mean_drift().unwrap() + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_fluid_swaps_roles() {
        let f = FluidModel::new(
            DenseMatrix::<f64>::from_f64_rows(&[&[-2.0, 2.0], &[1.0, -1.0]]),
            vec![1.0],
            vec![-1.0],
        )
        .unwrap();
        let r = f.reversed();
        assert_eq!(r.t(), &DenseMatrix::from_f64_rows(&[&[-1.0, 1.0], &[2.0, -2.0]]));
        assert_eq!(r.c_plus(), &[1.0]);
        assert_eq!(r.c_minus(), &[-1.0]);
        assert!((r.mean_drift().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fluid_file_ordering() {
        let ok = r#"{"T": [[-2, 2], [1, -1]], "c": [1, -1]}"#;
        let f: FluidModel<f64> = load_fluid_model(ok).unwrap();
        assert_eq!(f.n_plus(), 1);
        let bad = r#"{"T": [[-2, 2], [1, -1]], "c": [-1, 1]}"#;
        assert!(matches!(load_fluid_model::<f64>(bad), Err(Error::InvalidRates(_))));
        let zero = r#"{"T": [[-2, 2], [1, -1]], "c": [1, 0]}"#;
        assert!(load_fluid_model::<f64>(zero).is_err());
    }
}
