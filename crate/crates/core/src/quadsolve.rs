//! Unilateral quadratic matrix equations `A2 X² + A1 X + A0 = 0` with
//! half-plane spectral selection, and the nonsymmetric algebraic Riccati
//! equation of first-passage matrices.
//!
//! Half-plane splittings are mapped to unit-circle splittings by Möbius
//! substitutions and the disk-minimal solvent is computed by cyclic
//! reduction:
//!
//! * `cayley_forward` substitutes `X = (Z − I)(Z + I)⁻¹`; roots map by
//!   `ω = (1 + θ)/(1 − θ)`, so the closed left half-plane lands in the
//!   closed unit disk.
//! * `cayley_backward` substitutes `X = (I + W)(I − W)⁻¹`; roots map by
//!   `w = (θ − 1)/(θ + 1)`, so the open right half-plane lands in the open
//!   unit disk.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::numerics::{eigenvalues, half_plane_counts, inverse, solve, solve_right, sylvester, HalfPlaneCounts, Lu};
use crate::scalar::Scalar;

/// Residual acceptance for quadratic solvers, relative to `1 + max |coefficient|`.
pub const QUAD_RESIDUAL_TOL: f64 = 1e-10;
/// Relative zero tolerance for determinant roots.
pub const ROOT_ZERO_TOL: f64 = 1e-9;
/// Relative zero tolerance for eigenvalues of computed solutions.
pub const EIG_ZERO_TOL: f64 = 1e-8;
/// Iteration cap for cyclic reduction.
pub const CR_MAX_ITER: usize = 200;
/// Residual acceptance for the Riccati solver.
pub const RICCATI_TOL: f64 = 1e-10;
const RICCATI_MAX_ITER: usize = 200;

/// `A2 X² + A1 X + A0 = 0`, coefficients acting from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEq<T> {
    pub a2: DenseMatrix<T>,
    pub a1: DenseMatrix<T>,
    pub a0: DenseMatrix<T>,
}

impl<T: Scalar> QuadraticEq<T> {
    pub fn new(a2: DenseMatrix<T>, a1: DenseMatrix<T>, a0: DenseMatrix<T>) -> Result<Self> {
        let n = a2.rows();
        for (name, m) in [("A2", &a2), ("A1", &a1), ("A0", &a0)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if n == 0 {
            return Err(Error::Dimension("empty quadratic equation".into()));
        }
        Ok(Self { a2, a1, a0 })
    }

    /// `X² + B X + C = 0`.
    pub fn monic(b: DenseMatrix<T>, c: DenseMatrix<T>) -> Result<Self> {
        Self::new(DenseMatrix::identity(b.rows()), b, c)
    }

    /// Scalar equation `a2 x² + a1 x + a0 = 0`, handy for tests and examples.
    pub fn scalar(a2: f64, a1: f64, a0: f64) -> Self {
        let s = |x: f64| DenseMatrix::from_diag(&[T::c(x)]);
        Self::new(s(a2), s(a1), s(a0)).expect("1x1 coefficients")
    }

    pub fn dim(&self) -> usize {
        self.a2.rows()
    }

    pub fn is_monic(&self) -> bool {
        self.a2 == DenseMatrix::identity(self.dim())
    }

    /// `A2 z² + A1 z + A0` at a real point.
    pub fn eval_at(&self, z: T) -> DenseMatrix<T> {
        &(&self.a2.scale(z * z) + &self.a1.scale(z)) + &self.a0
    }

    pub fn residual(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        let x2 = x * x;
        &(&(&self.a2 * &x2) + &(&self.a1 * x)) + &self.a0
    }

    pub fn coefficient_scale(&self) -> T {
        self.a2.max_abs().max(self.a1.max_abs()).max(self.a0.max_abs())
    }

    /// `‖A2 X² + A1 X + A0‖ / (1 + max ‖A_k‖)` in the max-entry norm.
    pub fn scaled_residual(&self, x: &DenseMatrix<T>) -> T {
        self.residual(x).max_abs() / (T::one() + self.coefficient_scale())
    }

    /// The equation satisfied by `−X`: `A2 Y² − A1 Y + A0 = 0`.
    pub fn negate_variable(&self) -> Self {
        Self {
            a2: self.a2.clone(),
            a1: -&self.a1,
            a0: self.a0.clone(),
        }
    }

    fn require_monic(&self, op: &str) -> Result<()> {
        if self.is_monic() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{op} needs a monic equation (A2 = I)")))
        }
    }
}

/// Roots of `det(A2 z² + A1 z + A0)` sorted by real part, with half-plane counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit<T> {
    /// Finite roots, increasing real part (ties by imaginary part).
    pub roots: Vec<Complex<T>>,
    /// Roots at infinity (degree deficiency from a singular `A2`).
    pub n_infinite: usize,
    pub n_neg: usize,
    pub n_zero: usize,
    pub n_pos: usize,
    pub zero_tol: T,
}

impl<T: Scalar> SpectralSplit<T> {
    pub fn counts(&self) -> HalfPlaneCounts {
        HalfPlaneCounts {
            negative: self.n_neg,
            zero: self.n_zero,
            positive: self.n_pos,
        }
    }
}

/// Which `m` roots of the determinant a solvent must carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMode {
    /// `m − 1` eigenvalues in the open left half-plane and one at zero.
    WeaklyStable,
    /// `m` eigenvalues in the open left half-plane.
    StrictlyStable,
    /// `m` eigenvalues in the open right half-plane.
    StrictlyAntistable,
    /// `m − 1` eigenvalues in the open right half-plane and one at zero.
    WeaklyAntistable,
}

impl SpectralMode {
    /// Eigenvalue counts a solvent of an `m x m` equation must have.
    pub fn expected_counts(self, m: usize) -> HalfPlaneCounts {
        let (negative, zero, positive) = match self {
            SpectralMode::WeaklyStable => (m - 1, 1, 0),
            SpectralMode::StrictlyStable => (m, 0, 0),
            SpectralMode::StrictlyAntistable => (0, 0, m),
            SpectralMode::WeaklyAntistable => (0, 1, m - 1),
        };
        HalfPlaneCounts {
            negative,
            zero,
            positive,
        }
    }

    /// Whether the determinant split determines a unique solvent for this mode.
    fn compatible(self, split: &HalfPlaneCounts, m: usize) -> bool {
        match self {
            SpectralMode::WeaklyStable => split.negative == m - 1 && split.zero == 1,
            SpectralMode::StrictlyStable => split.negative == m,
            SpectralMode::StrictlyAntistable => split.positive == m,
            SpectralMode::WeaklyAntistable => split.positive == m - 1 && split.zero == 1,
        }
    }
}

fn sort_roots<T: Scalar>(roots: &mut [Complex<T>]) {
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

fn companion<T: Scalar>(b: &DenseMatrix<T>, c: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = b.rows();
    DenseMatrix::from_blocks(
        &DenseMatrix::zeros(n, n),
        &DenseMatrix::identity(n),
        &-c,
        &-b,
    )
}

fn reciprocal_condition<T: Scalar>(a: &DenseMatrix<T>) -> T {
    match inverse(a) {
        Ok(inv) => T::one() / (a.norm_inf() * inv.norm_inf()),
        Err(_) => T::zero(),
    }
}

/// Roots of `det(A2 z² + A1 z + A0)` through a `2m x 2m` companion
/// linearization.
///
/// A well-conditioned `A2` is divided out directly. Otherwise the variable is
/// shifted and inverted, `z = s + 1/y`, which turns roots at infinity into
/// zero roots `y` of a monic reversed polynomial.
pub fn det_poly_roots<T: Scalar>(eq: &QuadraticEq<T>) -> Result<SpectralSplit<T>> {
    let n = eq.dim();
    let zero_tol = T::c(ROOT_ZERO_TOL) * (T::one() + eq.coefficient_scale());
    let (mut roots, n_infinite) = if reciprocal_condition(&eq.a2) > T::c(1e-8) {
        let b = solve(&eq.a2, &eq.a1)?;
        let c = solve(&eq.a2, &eq.a0)?;
        (eigenvalues(&companion(&b, &c))?, 0)
    } else {
        let shifts = [0.5, -0.7, 1.3, -1.9, 2.9, 0.113];
        let (s, ps) = shifts
            .iter()
            .map(|&s| (T::c(s), eq.eval_at(T::c(s))))
            .find(|(_, ps)| reciprocal_condition(ps) > T::c(1e-10))
            .ok_or_else(|| Error::Singular("matrix polynomial is singular (determinant vanishes identically)".into()))?;
        // y² P(s) + y (2 s A2 + A1) + A2
        let mid = &eq.a2.scale(T::c(2.0) * s) + &eq.a1;
        let b = solve(&ps, &mid)?;
        let c = solve(&ps, &eq.a2)?;
        let ys = eigenvalues(&companion(&b, &c))?;
        let ymax = ys.iter().fold(T::zero(), |acc, y| acc.max(y.norm()));
        let inf_tol = T::c(1e-10) * ymax.max(T::one());
        let mut finite = Vec::with_capacity(2 * n);
        let mut infinite = 0;
        for y in ys {
            if y.norm() <= inf_tol {
                infinite += 1;
            } else {
                finite.push(Complex::new(s, T::zero()) + y.inv());
            }
        }
        (finite, infinite)
    };
    sort_roots(&mut roots);
    let counts = half_plane_counts(&roots, zero_tol);
    Ok(SpectralSplit {
        roots,
        n_infinite,
        n_neg: counts.negative,
        n_zero: counts.zero,
        n_pos: counts.positive,
        zero_tol,
    })
}

/// Coefficients of `P((Z − I)(Z + I)⁻¹)(I + Z)²` for monic `P = X² + BX + C`:
/// `(I + B + C) Z² − 2(I − C) Z + (I − B + C)`.
pub fn cayley_forward<T: Scalar>(eq: &QuadraticEq<T>) -> Result<QuadraticEq<T>> {
    eq.require_monic("cayley_forward")?;
    let id = DenseMatrix::identity(eq.dim());
    let (b, c) = (&eq.a1, &eq.a0);
    QuadraticEq::new(
        &(&id + b) + c,
        (&id - c).scale(T::c(-2.0)),
        &(&id - b) + c,
    )
}

/// Coefficients of `P((I + W)(I − W)⁻¹)(I − W)²` for monic `P = X² + BX + C`:
/// `(I − B + C) W² + 2(I − C) W + (I + B + C)`.
pub fn cayley_backward<T: Scalar>(eq: &QuadraticEq<T>) -> Result<QuadraticEq<T>> {
    eq.require_monic("cayley_backward")?;
    let id = DenseMatrix::identity(eq.dim());
    let (b, c) = (&eq.a1, &eq.a0);
    QuadraticEq::new(
        &(&id - b) + c,
        (&id - c).scale(T::c(2.0)),
        &(&id + b) + c,
    )
}

/// Tolerance for classifying a root as lying on the unit circle.
const CIRCLE_TOL: f64 = 1e-7;

fn check_disk_split<T: Scalar>(eq: &QuadraticEq<T>) -> Result<()> {
    let m = eq.dim();
    let split = det_poly_roots(eq)?;
    let tol = T::c(CIRCLE_TOL);
    let inside = split.roots.iter().filter(|r| r.norm() < T::one() - tol).count();
    let on = split
        .roots
        .iter()
        .filter(|r| (r.norm() - T::one()).abs() <= tol)
        .count();
    if inside <= m && m <= inside + on && on <= 1 {
        Ok(())
    } else {
        Err(Error::Splitting(format!(
            "{inside} roots strictly inside and {on} on the unit circle; need {m} in the closed disk with at most one on the circle"
        )))
    }
}

/// Cyclic reduction for the minimal solvent. `accept` maps a candidate
/// solvent to a residual measure; iteration stops once it is below `tol`.
fn cyclic_reduction_with<T: Scalar>(
    eq: &QuadraticEq<T>,
    accept: &dyn Fn(&DenseMatrix<T>) -> T,
    tol: T,
) -> Result<DenseMatrix<T>> {
    let mut am1 = eq.a0.clone();
    let mut a0k = eq.a1.clone();
    let mut ap1 = eq.a2.clone();
    let mut ahat = eq.a1.clone();
    let mut prev: Option<DenseMatrix<T>> = None;
    let mut stalled = 0;
    let mut last_res = T::infinity();
    let mut accepted: Option<(DenseMatrix<T>, T)> = None;
    for it in 0..CR_MAX_ITER {
        if let Ok(g) = solve(&ahat, &eq.a0).map(|g| -g) {
            let res = accept(&g);
            last_res = res;
            // one extra step past acceptance; convergence is quadratic
            if let Some((best, best_res)) = accepted.take() {
                return Ok(if res <= best_res { g } else { best });
            }
            if res <= tol {
                accepted = Some((g.clone(), res));
            }
            if let Some(p) = &prev {
                let step = (&g - p).max_abs();
                if step <= T::c(4.0) * T::epsilon() * (T::one() + g.max_abs()) {
                    stalled += 1;
                    if stalled >= 3 {
                        return Err(Error::NoConvergence {
                            what: "cyclic reduction (stagnated)",
                            iterations: it,
                            residual: res.as_f64(),
                        });
                    }
                } else {
                    stalled = 0;
                }
            }
            prev = Some(g);
        }
        let lu = match Lu::new(&a0k) {
            Ok(lu) => lu,
            Err(_) if accepted.is_some() => return Ok(accepted.unwrap().0),
            Err(_) => {
                return Err(Error::NoConvergence {
                    what: "cyclic reduction (singular middle coefficient)",
                    iterations: it,
                    residual: last_res.as_f64(),
                })
            }
        };
        let k_am1 = lu.solve(&am1);
        let k_ap1 = lu.solve(&ap1);
        let new_a0 = &(&a0k - &(&am1 * &k_ap1)) - &(&ap1 * &k_am1);
        ahat = &ahat - &(&ap1 * &k_am1);
        let new_am1 = -(&am1 * &k_am1);
        let new_ap1 = -(&ap1 * &k_ap1);
        am1 = new_am1;
        ap1 = new_ap1;
        a0k = new_a0;
    }
    if let Some((g, _)) = accepted {
        return Ok(g);
    }
    Err(Error::NoConvergence {
        what: "cyclic reduction",
        iterations: CR_MAX_ITER,
        residual: last_res.as_f64(),
    })
}

/// Minimal solvent (spectral radius ≤ 1) of an equation whose determinant
/// roots are split by the unit circle, computed by cyclic reduction.
pub fn cyclic_reduction<T: Scalar>(eq: &QuadraticEq<T>) -> Result<DenseMatrix<T>> {
    check_disk_split(eq)?;
    let tol = T::c(QUAD_RESIDUAL_TOL);
    cyclic_reduction_with(eq, &|g| eq.scaled_residual(g), tol)
}

fn from_forward<T: Scalar>(z: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let id = DenseMatrix::identity(z.rows());
    solve_right(&(z - &id), &(z + &id))
}

fn from_backward<T: Scalar>(w: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let id = DenseMatrix::identity(w.rows());
    solve_right(&(&id + w), &(&id - w))
}

fn verify_mode<T: Scalar>(x: &DenseMatrix<T>, mode: SpectralMode) -> Result<()> {
    let tol = T::c(EIG_ZERO_TOL) * (T::one() + x.max_abs());
    let counts = half_plane_counts(&eigenvalues(x)?, tol);
    let expected = mode.expected_counts(x.rows());
    if counts == expected {
        Ok(())
    } else {
        Err(Error::SpectralCount(format!(
            "{mode:?} solvent has (neg, zero, pos) = ({}, {}, {}), expected ({}, {}, {})",
            counts.negative,
            counts.zero,
            counts.positive,
            expected.negative,
            expected.zero,
            expected.positive
        )))
    }
}

/// Solvent of a monic quadratic whose spectrum is prescribed by `mode`.
///
/// The determinant split is checked first; the returned matrix has its
/// eigenvalue counts and residual verified.
pub fn solve_stable<T: Scalar>(eq: &QuadraticEq<T>, mode: SpectralMode) -> Result<DenseMatrix<T>> {
    eq.require_monic("solve_stable")?;
    let m = eq.dim();
    let split = det_poly_roots(eq)?;
    if !mode.compatible(&split.counts(), m) {
        return Err(Error::Splitting(format!(
            "determinant roots (neg, zero, pos) = ({}, {}, {}) do not determine a {mode:?} solvent",
            split.n_neg, split.n_zero, split.n_pos
        )));
    }
    let tol = T::c(QUAD_RESIDUAL_TOL);
    let x = match mode {
        SpectralMode::WeaklyStable => {
            let h = cayley_forward(eq)?;
            let accept = |z: &DenseMatrix<T>| {
                from_forward(z).map_or(T::infinity(), |x| eq.scaled_residual(&x))
            };
            from_forward(&cyclic_reduction_with(&h, &accept, tol)?)?
        }
        SpectralMode::StrictlyAntistable => {
            let q = cayley_backward(eq)?;
            let accept = |w: &DenseMatrix<T>| {
                from_backward(w).map_or(T::infinity(), |x| eq.scaled_residual(&x))
            };
            from_backward(&cyclic_reduction_with(&q, &accept, tol)?)?
        }
        SpectralMode::StrictlyStable => {
            -solve_stable(&eq.negate_variable(), SpectralMode::StrictlyAntistable)?
        }
        SpectralMode::WeaklyAntistable => {
            -solve_stable(&eq.negate_variable(), SpectralMode::WeaklyStable)?
        }
    };
    verify_mode(&x, mode)?;
    let res = eq.scaled_residual(&x);
    if !(res <= tol) {
        return Err(Error::NoConvergence {
            what: "solve_stable residual check",
            iterations: 0,
            residual: res.as_f64(),
        });
    }
    Ok(x)
}

/// Coefficients of `B + A Ψ + Ψ D + Ψ C Ψ = 0` for a fluid queue:
/// `A = (C⁺)⁻¹T⁺⁺`, `B = (C⁺)⁻¹T⁺⁻`, `C = |C⁻|⁻¹T⁻⁺`, `D = |C⁻|⁻¹T⁻⁻`.
#[derive(Debug, Clone)]
pub struct RiccatiBlocks<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub c: DenseMatrix<T>,
    pub d: DenseMatrix<T>,
}

impl<T: Scalar> RiccatiBlocks<T> {
    pub fn from_fluid(fm: &crate::model::FluidModel<T>) -> Self {
        let inv_plus: Vec<T> = fm.c_plus().iter().map(|&c| T::one() / c).collect();
        let inv_minus: Vec<T> = fm.abs_c_minus().iter().map(|&c| T::one() / c).collect();
        Self {
            a: fm.t_pp().scale_rows(&inv_plus),
            b: fm.t_pm().scale_rows(&inv_plus),
            c: fm.t_mp().scale_rows(&inv_minus),
            d: fm.t_mm().scale_rows(&inv_minus),
        }
    }

    pub fn residual(&self, psi: &DenseMatrix<T>) -> DenseMatrix<T> {
        let quad = &(psi * &self.c) * psi;
        &(&(&self.b + &(&self.a * psi)) + &(psi * &self.d)) + &quad
    }

    fn scale(&self) -> T {
        T::one()
            + self
                .a
                .max_abs()
                .max(self.b.max_abs())
                .max(self.c.max_abs())
                .max(self.d.max_abs())
    }

    /// Residual relative to `1 + max` coefficient magnitude.
    pub fn scaled_residual(&self, psi: &DenseMatrix<T>) -> T {
        self.residual(psi).max_abs() / self.scale()
    }
}

/// Minimal nonnegative solution of `B + A Ψ + Ψ D + Ψ C Ψ = 0`.
///
/// Newton's method started at zero; each step solves the Sylvester equation
/// `(A + Ψₖ C) Ψₖ₊₁ + Ψₖ₊₁ (D + C Ψₖ) = Ψₖ C Ψₖ − B`. The iterates increase
/// monotonically to the minimal solution.
pub fn riccati_min_nonneg<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    d: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    let blocks = check_riccati_shapes(a, b, c, d)?;
    let tol = T::c(RICCATI_TOL);
    let mut psi = DenseMatrix::zeros(b.rows(), b.cols());
    let mut res = blocks.scaled_residual(&psi);
    for _ in 0..RICCATI_MAX_ITER {
        let left = &blocks.a + &(&psi * &blocks.c);
        let right = &blocks.d + &(&blocks.c * &psi);
        let rhs = &(&(&psi * &blocks.c) * &psi) - &blocks.b;
        let next = sylvester(&left, &right, &rhs)?;
        let step = (&next - &psi).max_abs();
        psi = next;
        res = blocks.scaled_residual(&psi);
        if res <= tol && step <= T::c(1e-13) * (T::one() + psi.max_abs()) {
            return Ok(psi);
        }
        if step == T::zero() {
            break;
        }
    }
    if res <= tol {
        Ok(psi)
    } else {
        Err(Error::NoConvergence {
            what: "Riccati Newton iteration",
            iterations: RICCATI_MAX_ITER,
            residual: res.as_f64(),
        })
    }
}

/// Plain fixed-point iteration `A Ψₖ₊₁ + Ψₖ₊₁ D = −B − Ψₖ C Ψₖ` from zero.
/// Linearly convergent; kept as an independent cross-check of the Newton
/// solver.
pub fn riccati_fixed_point<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    d: &DenseMatrix<T>,
    max_iter: usize,
) -> Result<DenseMatrix<T>> {
    let blocks = check_riccati_shapes(a, b, c, d)?;
    let mut psi = DenseMatrix::zeros(b.rows(), b.cols());
    for _ in 0..max_iter {
        let rhs = -(&blocks.b + &(&(&psi * &blocks.c) * &psi));
        let next = sylvester(&blocks.a, &blocks.d, &rhs)?;
        let step = (&next - &psi).max_abs();
        psi = next;
        if step <= T::c(1e-15) {
            break;
        }
    }
    let res = blocks.scaled_residual(&psi);
    if res <= T::c(RICCATI_TOL) {
        Ok(psi)
    } else {
        Err(Error::NoConvergence {
            what: "Riccati fixed-point iteration",
            iterations: max_iter,
            residual: res.as_f64(),
        })
    }
}

fn check_riccati_shapes<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    d: &DenseMatrix<T>,
) -> Result<RiccatiBlocks<T>> {
    let (p, q) = (a.rows(), d.rows());
    let ok = a.is_square()
        && d.is_square()
        && b.rows() == p
        && b.cols() == q
        && c.rows() == q
        && c.cols() == p;
    if !ok {
        return Err(Error::Dimension(format!(
            "Riccati blocks A {}x{}, B {}x{}, C {}x{}, D {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols(),
            d.rows(),
            d.cols()
        )));
    }
    Ok(RiccatiBlocks {
        a: a.clone(),
        b: b.clone(),
        c: c.clone(),
        d: d.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fluidize, FluidModel, MmbmModel};

    fn p_of(model: &MmbmModel<f64>) -> QuadraticEq<f64> {
        let vinv: Vec<f64> = model.sigma2().iter().map(|s| 2.0 / s).collect();
        QuadraticEq::monic(model.d().scale_rows(&vinv), model.q().scale_rows(&vinv)).unwrap()
    }

    fn m1() -> MmbmModel<f64> {
        MmbmModel::from_f64(&[&[0.0]], &[-1.0], &[2.0]).unwrap()
    }

    fn m2() -> MmbmModel<f64> {
        MmbmModel::from_f64(&[&[-1.0, 1.0], &[1.0, -1.0]], &[1.0, -2.0], &[1.0, 1.0]).unwrap()
    }

    fn f1() -> FluidModel<f64> {
        FluidModel::new(
            DenseMatrix::from_f64_rows(&[&[-2.0, 2.0], &[1.0, -1.0]]),
            vec![1.0],
            vec![-1.0],
        )
        .unwrap()
    }

    #[test]
    fn det_roots_m1() {
        let eq = p_of(&m1());
        assert_eq!(eq, QuadraticEq::scalar(1.0, -1.0, 0.0));
        let s = det_poly_roots(&eq).unwrap();
        assert_eq!((s.n_neg, s.n_zero, s.n_pos), (0, 1, 1));
        assert!(s.roots[0].norm() < 1e-15 && (s.roots[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn det_roots_m2_counts() {
        let s = det_poly_roots(&p_of(&m2())).unwrap();
        assert_eq!((s.n_neg, s.n_zero, s.n_pos, s.n_infinite), (1, 1, 2, 0));
    }

    #[test]
    fn det_roots_scalar_factorization() {
        let s = det_poly_roots(&QuadraticEq::<f64>::scalar(1.0, -3.0, 2.0)).unwrap();
        assert!((s.roots[0].re - 1.0).abs() < 1e-14 && (s.roots[1].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn det_roots_with_singular_leading_coefficient() {
        // H for M1 is 0 z² + 2 z + 2: one finite root at -1 and one at infinity
        let h = cayley_forward(&p_of(&m1())).unwrap();
        assert_eq!(h, QuadraticEq::scalar(0.0, -2.0, 2.0));
        let s = det_poly_roots(&h).unwrap();
        assert_eq!(s.n_infinite, 1);
        assert_eq!(s.roots.len(), 1);
        assert!((s.roots[0].re - 1.0).abs() < 1e-12);
        let zero = QuadraticEq::<f64>::scalar(0.0, 0.0, 0.0);
        assert!(matches!(det_poly_roots(&zero), Err(Error::Singular(_))));
    }

    #[test]
    fn cayley_backward_m1() {
        let q = cayley_backward(&p_of(&m1())).unwrap();
        assert_eq!(q, QuadraticEq::scalar(2.0, 2.0, 0.0));
        let s = det_poly_roots(&q).unwrap();
        assert!((s.roots[0].re + 1.0).abs() < 1e-14 && s.roots[1].norm() < 1e-14);
    }

    #[test]
    fn cayley_forward_m2_leading_coefficient() {
        let p = p_of(&m2());
        let h = cayley_forward(&p).unwrap();
        // I + 2V⁻¹D + 2V⁻¹Q with V = I, D = diag(1,-2), Q symmetric
        let expected = DenseMatrix::from_f64_rows(&[&[1.0 + 2.0 - 2.0, 2.0], &[2.0, 1.0 - 4.0 - 2.0]]);
        assert_eq!(h.a2, expected);
        assert!(cayley_forward(&QuadraticEq::<f64>::scalar(2.0, 1.0, 0.0)).is_err());
        assert!(cayley_backward(&QuadraticEq::<f64>::scalar(2.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn cayley_maps_roots() {
        let p = p_of(&m2());
        let theta = det_poly_roots(&p).unwrap().roots;
        let omega = det_poly_roots(&cayley_forward(&p).unwrap()).unwrap().roots;
        for t in &theta {
            let w = (Complex::new(1.0, 0.0) + t) / (Complex::new(1.0, 0.0) - t);
            assert!(omega.iter().any(|o| (o - w).norm() < 1e-9 * (1.0 + w.norm())), "{w}");
        }
        let back = det_poly_roots(&cayley_backward(&p).unwrap()).unwrap().roots;
        for t in &theta {
            let w = (t - Complex::new(1.0, 0.0)) / (t + Complex::new(1.0, 0.0));
            assert!(back.iter().any(|o| (o - w).norm() < 1e-9 * (1.0 + w.norm())), "{w}");
        }
    }

    #[test]
    fn cyclic_reduction_scalars() {
        let x = cyclic_reduction(&QuadraticEq::<f64>::scalar(1.0, -3.0, 2.0)).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-10);
        let x = cyclic_reduction(&QuadraticEq::<f64>::scalar(1.0, -2.5, 1.0)).unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cyclic_reduction_rejects_bad_split() {
        // roots 0.5 and 0.25, both inside
        let eq = QuadraticEq::<f64>::scalar(1.0, -0.75, 0.125);
        assert!(matches!(cyclic_reduction(&eq), Err(Error::Splitting(_))));
    }

    #[test]
    fn solve_stable_m1() {
        let p = p_of(&m1());
        let x = solve_stable(&p, SpectralMode::WeaklyStable).unwrap();
        assert!(x[(0, 0)].abs() < 1e-12);
        let x = solve_stable(&p, SpectralMode::StrictlyAntistable).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(matches!(
            solve_stable(&p, SpectralMode::StrictlyStable),
            Err(Error::Splitting(_))
        ));
    }

    #[test]
    fn solve_stable_m2_is_a_generator() {
        let p = p_of(&m2());
        let x = solve_stable(&p, SpectralMode::WeaklyStable).unwrap();
        assert!(p.scaled_residual(&x) < 1e-12);
        for s in x.row_sums() {
            assert!(s.abs() < 1e-10);
        }
        assert!(x[(0, 1)] > 0.0 && x[(1, 0)] > 0.0);
    }

    #[test]
    fn riccati_closed_forms() {
        let rb = RiccatiBlocks::from_fluid(&f1());
        let psi = riccati_min_nonneg(&rb.a, &rb.b, &rb.c, &rb.d).unwrap();
        assert!((psi[(0, 0)] - 1.0).abs() < 1e-12);

        let transient = FluidModel::<f64>::new(
            DenseMatrix::from_f64_rows(&[&[-1.0, 1.0], &[2.0, -2.0]]),
            vec![1.0],
            vec![-1.0],
        )
        .unwrap();
        let rb = RiccatiBlocks::from_fluid(&transient);
        let psi = riccati_min_nonneg(&rb.a, &rb.b, &rb.c, &rb.d).unwrap();
        assert!((psi[(0, 0)] - 0.5).abs() < 1e-12);

        let rb = RiccatiBlocks::from_fluid(&fluidize(&m1(), 8.0).unwrap());
        let psi = riccati_min_nonneg(&rb.a, &rb.b, &rb.c, &rb.d).unwrap();
        assert!((psi[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn riccati_newton_matches_fixed_point() {
        let rb = RiccatiBlocks::from_fluid(&fluidize(&m2(), 20.0).unwrap());
        let newton = riccati_min_nonneg(&rb.a, &rb.b, &rb.c, &rb.d).unwrap();
        let fixed = riccati_fixed_point(&rb.a, &rb.b, &rb.c, &rb.d, 200_000).unwrap();
        assert!((newton - fixed).max_abs() < 1e-9);
    }

    #[test]
    fn riccati_bad_shapes() {
        let a = DenseMatrix::<f64>::identity(2);
        let b = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            riccati_min_nonneg(&a, &b, &b, &a),
            Err(Error::Dimension(_))
        ));
    }
}
