use crate::error::{Error, Result};
use crate::scalar::Scalar;

// 5-point Gauss–Legendre rule on [-1, 1]; exact for polynomials of degree 9.
const NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre integral of a vector-valued function over
/// `[a, b]` split into `panels` equal panels. The error is `O(h^10)` in the
/// panel width `h` for smooth integrands.
pub fn quadrature<T, F>(f: F, a: T, b: T, panels: usize) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(T) -> Vec<T>,
{
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "quadrature interval [{a}, {b}] is empty"
        )));
    }
    if panels == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one panel".into()));
    }
    let h = (b - a) / T::c(panels as f64);
    let half = h * T::c(0.5);
    let mut acc: Option<Vec<T>> = None;
    for p in 0..panels {
        let mid = a + h * T::c(p as f64) + half;
        for (&x, &w) in NODES.iter().zip(&WEIGHTS) {
            let fx = f(mid + half * T::c(x));
            let w = half * T::c(w);
            match acc.as_mut() {
                None => acc = Some(fx.into_iter().map(|v| v * w).collect()),
                Some(sum) => {
                    assert_eq!(sum.len(), fx.len(), "integrand changed output length");
                    for (s, v) in sum.iter_mut().zip(fx) {
                        *s += v * w;
                    }
                }
            }
        }
    }
    Ok(acc.unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_linear() {
        let one = quadrature(|_x: f64| vec![1.0], 0.0, 1.0, 1).unwrap();
        assert!((one[0] - 1.0).abs() < 1e-15);
        let lin = quadrature(|x: f64| vec![x], 0.0, 1.0, 3).unwrap();
        assert!((lin[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_tail() {
        let v = quadrature(|x: f64| vec![(-x).exp(), 2.0 * (-x).exp()], 0.0, 10.0, 20).unwrap();
        let exact = 1.0 - (-10f64).exp();
        assert!((v[0] - exact).abs() < 1e-10);
        assert!((v[1] - 2.0 * exact).abs() < 1e-10);
    }

    #[test]
    fn degree_nine_exact_on_one_panel() {
        let v = quadrature(|x: f64| vec![x.powi(9)], -1.0, 2.0, 1).unwrap();
        assert!((v[0] - (2f64.powi(10) - 1.0) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn bad_arguments() {
        assert!(quadrature(|_x: f64| vec![1.0], 1.0, 1.0, 4).is_err());
        assert!(quadrature(|_x: f64| vec![1.0], 2.0, 1.0, 4).is_err());
        assert!(quadrature(|_x: f64| vec![1.0], 0.0, 1.0, 0).is_err());
    }
}
