//! Gauss-Legendre quadrature, plain and composite.

use crate::error::{Error, Result};

/// A quadrature rule on `[a, b]`: strictly increasing interior nodes with
/// positive weights summing to `b - a`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre polynomial.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton to machine precision.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_eval(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term
/// recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// N-point Gauss-Legendre rule on `[a, b]`; exact for polynomials up to
/// degree `2N - 1`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Domain("quadrature order must be >= 1".into()));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!(
            "invalid interval [{a}, {b}]: need a < b"
        )));
    }
    let (x, w) = legendre_nodes(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Ok(QuadratureRule {
        nodes: x.iter().map(|&t| mid + half * t).collect(),
        weights: w.iter().map(|&t| half * t).collect(),
        a,
        b,
    })
}

/// Composite rule: an m-point Gauss-Legendre rule on every panel
/// `[edges[i], edges[i+1]]`. Exact for polynomials up to degree `2m - 1`.
pub fn composite_gauss_legendre(edges: &[f64], m: usize) -> Result<QuadratureRule> {
    if edges.len() < 2 {
        return Err(Error::Domain("need at least one panel".into()));
    }
    if edges.windows(2).any(|e| e[0] >= e[1]) {
        return Err(Error::Domain(
            "panel edges must be strictly increasing".into(),
        ));
    }
    let mut nodes = Vec::with_capacity(m * (edges.len() - 1));
    let mut weights = Vec::with_capacity(m * (edges.len() - 1));
    for e in edges.windows(2) {
        let rule = gauss_legendre(m, e[0], e[1])?;
        nodes.extend(rule.nodes);
        weights.extend(rule.weights);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        a: edges[0],
        b: *edges.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_relative_eq!(r.nodes[0], 0.0);
        assert_relative_eq!(r.weights[0], 2.0);
    }

    #[test]
    fn integrates_x_squared() {
        let r = gauss_legendre(5, 0.0, 1.0).unwrap();
        assert_relative_eq!(r.integrate(|x| x * x), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_decaying_exponential() {
        let r = gauss_legendre(50, 0.0, 40.0).unwrap();
        assert_relative_eq!(r.integrate(|x| (-x).exp()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_empty_or_reversed_interval() {
        assert!(gauss_legendre(5, 1.0, 1.0).is_err());
        assert!(gauss_legendre(5, 2.0, 1.0).is_err());
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn doubling_order_converged_gaussian() {
        let a = gauss_legendre(60, 0.0, 10.0)
            .unwrap()
            .integrate(|x| (-x * x).exp());
        let b = gauss_legendre(120, 0.0, 10.0)
            .unwrap()
            .integrate(|x| (-x * x).exp());
        assert!((a - b).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn polynomial_exactness(n in 1usize..12, degree_frac in 0.0f64..1.0) {
            // exact up to degree 2n-1; test a monomial of admissible degree
            let deg = ((2 * n - 1) as f64 * degree_frac) as i32;
            let r = gauss_legendre(n, 0.0, 1.0).unwrap();
            let got = r.integrate(|x| x.powi(deg));
            let exact = 1.0 / (deg as f64 + 1.0);
            prop_assert!((got - exact).abs() < 1e-12);
        }

        #[test]
        fn weights_positive_and_sum_to_length(n in 1usize..200) {
            let r = gauss_legendre(n, 0.0, 3.5).unwrap();
            prop_assert!(r.weights.iter().all(|&w| w > 0.0));
            let sum: f64 = r.weights.iter().sum();
            prop_assert!((sum - 3.5).abs() < 1e-12 * 3.5);
            prop_assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
            prop_assert!(r.nodes[0] > 0.0 && *r.nodes.last().unwrap() < 3.5);
        }
    }

    #[test]
    fn composite_matches_plain_on_smooth_integrand() {
        let c = composite_gauss_legendre(&[0.0, 0.5, 1.0, 2.0], 12).unwrap();
        let p = gauss_legendre(40, 0.0, 2.0).unwrap();
        assert_relative_eq!(
            c.integrate(|x| (x.sin() + 1.0).ln()),
            p.integrate(|x| (x.sin() + 1.0).ln()),
            epsilon = 1e-13
        );
    }
}
