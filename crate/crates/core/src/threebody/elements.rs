//! Closed-form Hamiltonian and overlap matrix elements in the correlated
//! Gaussian basis, for `H(Theta, Lambda) = -Lap_x - Lap_y - V12 - Theta V13
//! - Lambda V23`.
//!
//! For forms `A_m, A_n` and `B = A_m + A_n`:
//!   overlap   `S = (2 pi)^3 / det(B)^{3/2}`,
//!   kinetic   `T = 3 tr(A_m B^{-1} A_n) S`,
//!   potential `V = S * E[V(|d|)]` where the pair separation `d = c^T xi` is
//!   Gaussian with isotropic 3D variance `sigma^2 = c^T B^{-1} c`.
//! Gaussian-shaped potentials give `E = V0 (1 + 2 sigma^2 / R^2)^{-3/2}`;
//! other shapes go through a 1D radial quadrature of the same expectation.
//! All matrix elements are built in the unit-diagonal normalization
//! `S_nn = 1`.

use nalgebra::{DMatrix, Matrix2, Vector2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{JacobiFrame, Pair, PairPotential, Shape};
use crate::numerics::gauss_legendre;

const TWO_PI_CUBED: f64 =
    (2.0 * std::f64::consts::PI) * (2.0 * std::f64::consts::PI) * (2.0 * std::f64::consts::PI);

/// Raw (unnormalized) overlap of two forms.
#[inline]
fn raw_overlap(b: &Matrix2<f64>) -> f64 {
    TWO_PI_CUBED / b.determinant().powf(1.5)
}

/// `1/sqrt(S_nn)` normalization factor of one form.
#[inline]
pub fn norm_factor(a: &Matrix2<f64>) -> f64 {
    1.0 / raw_overlap(&(a * 2.0)).sqrt()
}

/// Expectation of a radial potential over an isotropic 3D Gaussian
/// separation with variance `sigma2`.
fn potential_expectation(p: &PairPotential, sigma2: f64) -> f64 {
    let strength = p.lambda * p.depth;
    if strength == 0.0 {
        return 0.0;
    }
    match p.shape {
        Shape::Gaussian => strength * (1.0 + 2.0 * sigma2 / (p.range * p.range)).powf(-1.5),
        _ => {
            // E = 4 pi (2 pi sigma^2)^{-3/2} int_0^smax s^2 V(s) e^{-s^2/(2 sigma^2)} ds
            // with a panel split so both the potential scale and the Gaussian
            // scale are resolved even when they differ by orders of magnitude
            let sigma = sigma2.sqrt();
            let s_max = match p.shape {
                Shape::SquareWell => p.range.min(9.0 * sigma),
                _ => 9.0 * sigma,
            };
            if s_max <= 0.0 {
                return 0.0;
            }
            let s_break = (42.0 * p.range).min(s_max);
            let integral = if s_break < s_max * (1.0 - 1e-12) {
                let inner = gauss_legendre(64, 0.0, s_break).expect("valid interval");
                let outer = gauss_legendre(64, s_break, s_max).expect("valid interval");
                let f = |s: f64| s * s * p.eval_unchecked(s) * (-s * s / (2.0 * sigma2)).exp();
                inner.integrate(f) + outer.integrate(f)
            } else {
                let rule = gauss_legendre(64, 0.0, s_max).expect("valid interval");
                rule.integrate(|s| s * s * p.eval_unchecked(s) * (-s * s / (2.0 * sigma2)).exp())
            };
            4.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * sigma2).powf(-1.5) * integral
        }
    }
}

/// The three pair potentials entering `H(Theta, Lambda)`, with physical
/// arguments; `v12` carries its threshold coupling, `v13`/`v23` are unit
/// potentials multiplied by the running couplings.
#[derive(Debug, Clone, Copy)]
pub struct ThreeBodyPotentials {
    pub v12: PairPotential,
    pub v13: PairPotential,
    pub v23: PairPotential,
}

/// Builds `(H, S)` over the given forms, in unit-diagonal normalization.
/// `H` and `S` are exactly symmetric by construction.
pub fn hamiltonian_elements(
    forms: &[Matrix2<f64>],
    frame: &JacobiFrame,
    potentials: &ThreeBodyPotentials,
    theta: f64,
    lambda: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if forms.is_empty() {
        return Err(Error::Domain("basis is empty".into()));
    }
    if !(theta >= 0.0 && lambda >= 0.0 && theta.is_finite() && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "couplings must be >= 0 and finite, got theta = {theta}, lambda = {lambda}"
        )));
    }
    let n = forms.len();
    let norms: Vec<f64> = forms.iter().map(norm_factor).collect();
    let pair_data: [(Vector2<f64>, PairPotential, f64); 3] = [
        (frame.coeff(Pair::P12), potentials.v12, 1.0),
        (frame.coeff(Pair::P13), potentials.v13, theta),
        (frame.coeff(Pair::P23), potentials.v23, lambda),
    ];

    let rows: Vec<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(i + 1);
            for j in 0..=i {
                let b = forms[i] + forms[j];
                let det = b.determinant();
                if !(det > 0.0) {
                    row.push((f64::NAN, f64::NAN));
                    continue;
                }
                let b_inv = b.try_inverse().unwrap_or_else(Matrix2::zeros);
                let s = TWO_PI_CUBED / det.powf(1.5);
                let t = 3.0 * (forms[i] * b_inv * forms[j]).trace() * s;
                let mut v = 0.0;
                for (c, p, g) in &pair_data {
                    if *g == 0.0 || p.is_zero() {
                        continue;
                    }
                    let sigma2 = (c.transpose() * b_inv * c)[(0, 0)];
                    v -= g * potential_expectation(p, sigma2) * s;
                }
                let f = norms[i] * norms[j];
                row.push(((t + v) * f, s * f));
            }
            row
        })
        .collect();

    let mut h = DMatrix::zeros(n, n);
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (hij, sij) = rows[i][j];
            if !hij.is_finite() || !sij.is_finite() {
                return Err(Error::Input(format!(
                    "form pair ({i}, {j}) produced a non-SPD combined form"
                )));
            }
            h[(i, j)] = hij;
            h[(j, i)] = hij;
            s[(i, j)] = sij;
            s[(j, i)] = sij;
        }
    }
    Ok((h, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pair_coefficients, reduced_masses, PairPotential};
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;

    fn frame_111() -> JacobiFrame {
        pair_coefficients(&reduced_masses(1.0, 1.0, 1.0).unwrap())
    }

    fn zero_potentials() -> ThreeBodyPotentials {
        let z = PairPotential::gaussian(0.0, 1.0).unwrap();
        ThreeBodyPotentials {
            v12: z,
            v13: z,
            v23: z,
        }
    }

    /// Kinetic Rayleigh quotient of a single Gaussian equals (3/2) tr(A),
    /// cross-checked against a 2D radial quadrature oracle.
    #[test]
    fn single_gaussian_kinetic_expectation() {
        let frame = frame_111();
        let a = Matrix2::new(0.8, 0.2, 0.2, 1.7);
        let (h, s) = hamiltonian_elements(&[a], &frame, &zero_potentials(), 0.0, 0.0).unwrap();
        let rq = h[(0, 0)] / s[(0, 0)];
        assert_relative_eq!(rq, 1.5 * a.trace(), max_relative = 1e-12);

        // quadrature oracle in the diagonalizing frame: A -> diag(b1, b2)
        let (b1, b2) = super::super::basis::eigenvalues_2x2(&a);
        let rule = gauss_legendre(80, 0.0, 12.0).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
            for (&v, &wv) in rule.nodes.iter().zip(&rule.weights) {
                let w = wu * wv * u * u * v * v * (-(b1 * u * u + b2 * v * v)).exp();
                // |grad|^2 of exp(-(b1 u^2 + b2 v^2)/2) over the density
                num += w * (b1 * b1 * u * u + b2 * b2 * v * v);
                den += w;
            }
        }
        assert_relative_eq!(rq, num / den, max_relative = 1e-8);
    }

    #[test]
    fn gaussian_potential_element_matches_quadrature() {
        let frame = frame_111();
        let v = PairPotential::gaussian(1.3, 0.9).unwrap();
        let pots = ThreeBodyPotentials {
            v12: v,
            v13: PairPotential::gaussian(0.0, 1.0).unwrap(),
            v23: PairPotential::gaussian(0.0, 1.0).unwrap(),
        };
        let a = Matrix2::new(1.1, -0.3, -0.3, 0.7);
        let (h, s) = hamiltonian_elements(&[a], &frame, &pots, 0.0, 0.0).unwrap();
        let ve = h[(0, 0)] / s[(0, 0)] - 1.5 * a.trace();
        // oracle: expectation of -V over the Gaussian separation distribution
        let b_inv = (a * 2.0).try_inverse().unwrap();
        let c = frame.coeff(Pair::P12);
        let sigma2 = (c.transpose() * b_inv * c)[(0, 0)];
        let rule = gauss_legendre(200, 0.0, 9.0 * sigma2.sqrt()).unwrap();
        let integral =
            rule.integrate(|r| r * r * v.eval_unchecked(r) * (-r * r / (2.0 * sigma2)).exp());
        let expect = -4.0
            * std::f64::consts::PI
            * (2.0 * std::f64::consts::PI * sigma2).powf(-1.5)
            * integral;
        assert_relative_eq!(ve, expect, max_relative = 1e-10);
    }

    #[test]
    fn square_well_element_matches_gaussian_limit_route() {
        // the square-well expectation integral against the closed-form 3D
        // Gaussian ball mass
        let sigma2: f64 = 0.63;
        let p = PairPotential::square_well(2.0, 1.1).unwrap();
        let e = potential_expectation(&p, sigma2);
        // oracle: 3D chi distribution CDF by dense quadrature
        let rule = gauss_legendre(4000, 0.0, 1.1).unwrap();
        let integral = rule.integrate(|s| s * s * (-s * s / (2.0 * sigma2)).exp());
        let expect = 2.0
            * 4.0
            * std::f64::consts::PI
            * (2.0 * std::f64::consts::PI * sigma2).powf(-1.5)
            * integral;
        assert_relative_eq!(e, expect, max_relative = 1e-12);
    }

    #[test]
    fn elements_invariant_under_basis_permutation() {
        let frame = frame_111();
        let v = PairPotential::gaussian(1.0, 1.0).unwrap();
        let pots = ThreeBodyPotentials {
            v12: v.with_lambda(2.0).unwrap(),
            v13: v,
            v23: v,
        };
        let f1 = Matrix2::new(1.0, 0.0, 0.0, 2.0);
        let f2 = Matrix2::new(0.5, 0.1, 0.1, 0.9);
        let f3 = Matrix2::new(2.0, -0.4, -0.4, 3.0);
        let (h, s) = hamiltonian_elements(&[f1, f2, f3], &frame, &pots, 0.7, 0.3).unwrap();
        let (hp, sp) = hamiltonian_elements(&[f3, f1, f2], &frame, &pots, 0.7, 0.3).unwrap();
        let perm = [2usize, 0, 1]; // column p of new = old index
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(hp[(i, j)], h[(perm[i], perm[j])], max_relative = 1e-14);
                assert_relative_eq!(sp[(i, j)], s[(perm[i], perm[j])], max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn rejects_negative_couplings() {
        let frame = frame_111();
        let a = Matrix2::identity();
        assert!(hamiltonian_elements(&[a], &frame, &zero_potentials(), -0.1, 0.0).is_err());
    }
}
