//! Ground-state solves, the Theta scan with threshold location, and the
//! spreading observables.

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{JacobiFrame, MassConfig, Pair, PairPotentials};
use crate::numerics::{gauss_legendre, gen_sym_eig_min_pruned, OVERLAP_CUTOFF};
use crate::twobody::{coupling_threshold, BsGrid};

use super::basis::{eigenvalues_2x2, BasisRecipe, GaussianBasis};
use super::elements::{hamiltonian_elements, norm_factor, ThreeBodyPotentials};

/// Default binding-detection threshold for the Theta scan.
pub const TOL_BIND: f64 = 1e-6;

/// Variational ground-state result.
#[derive(Debug, Clone)]
pub struct VariationalResult {
    /// upper bound to the ground energy
    pub e_gr: f64,
    /// coefficients in the unit-diagonal basis, S-orthonormal
    pub coefficients: DVector<f64>,
    pub overlap_condition: f64,
    /// basis dimension after overlap pruning
    pub kept: usize,
    pub basis_size: usize,
}

/// Solves for the variational ground state of `(H, S)`.
pub fn ground_state(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<VariationalResult> {
    let sol = gen_sym_eig_min_pruned(h, s, OVERLAP_CUTOFF)?;
    Ok(VariationalResult {
        e_gr: sol.value,
        coefficients: sol.vector,
        overlap_condition: sol.condition,
        kept: sol.kept,
        basis_size: h.nrows(),
    })
}

/// One row of a Theta scan.
#[derive(Debug, Clone)]
pub struct ScanRecord {
    pub theta: f64,
    pub lambda: f64,
    pub e_gr: f64,
    /// `I_R` for every requested radius, in the order of `r_list`
    pub i_r: Vec<f64>,
    pub xi2_moment: f64,
    pub basis_size: usize,
    pub kept: usize,
    pub overlap_condition: f64,
}

/// Result of the two-body subthreshold computation for pairs 13 and 23.
#[derive(Debug, Clone, Copy)]
pub struct SubThresholds {
    pub theta_cr: f64,
    pub lambda_cr: f64,
}

/// Two-body coupling thresholds of pairs 13 and 23, with the reduced masses
/// folded into the scaled potential arguments.
pub fn two_body_subthresholds(
    masses: &MassConfig,
    potentials: &PairPotentials,
    n_nodes: usize,
) -> Result<SubThresholds> {
    let q13 = potentials.scaled_for_pair(Pair::P13, masses)?;
    let q23 = potentials.scaled_for_pair(Pair::P23, masses)?;
    let g13 = BsGrid::for_potential(&q13, n_nodes)?;
    let g23 = BsGrid::for_potential(&q23, n_nodes)?;
    Ok(SubThresholds {
        theta_cr: coupling_threshold(&q13, &g13)?.lambda_cr,
        lambda_cr: coupling_threshold(&q23, &g23)?.lambda_cr,
    })
}

/// Reference rules reused for every basis pair of one `I_R` evaluation.
struct BallRule {
    /// 64-point Gauss-Legendre on [0, 1], mapped per pair
    unit: Vec<(f64, f64)>,
    /// 48-point rule on [0, pi/2] with the angular factor folded in:
    /// (cos^2, weight * cos^2 sin^2)
    phi: Vec<(f64, f64)>,
    r: f64,
}

impl BallRule {
    fn new(r: f64) -> Self {
        let unit_rule = gauss_legendre(64, 0.0, 1.0).expect("valid interval");
        let phi_rule =
            gauss_legendre(48, 0.0, std::f64::consts::FRAC_PI_2).expect("valid interval");
        BallRule {
            unit: unit_rule
                .nodes
                .iter()
                .zip(&unit_rule.weights)
                .map(|(&x, &w)| (x, w))
                .collect(),
            phi: phi_rule
                .nodes
                .iter()
                .zip(&phi_rule.weights)
                .map(|(&p, &w)| {
                    let c2 = p.cos() * p.cos();
                    let s2 = p.sin() * p.sin();
                    (c2, w * c2 * s2)
                })
                .collect(),
            r,
        }
    }

    /// `int_0^{pi/2} cos^2 sin^2 e^{-a cos^2} dphi` for `a >= 0`. Mild
    /// anisotropy integrates directly; strong anisotropy concentrates the
    /// mass at phi = pi/2 and is integrated in the stretched variable
    /// `v = (pi/2 - phi) sqrt(a)`.
    fn angular(&self, a: f64) -> f64 {
        if a <= 25.0 {
            self.phi.iter().map(|&(c2, w)| w * (-a * c2).exp()).sum()
        } else {
            let sqrt_a = a.sqrt();
            let v_max = (sqrt_a * std::f64::consts::FRAC_PI_2).min(12.0);
            let scale = v_max / sqrt_a;
            self.unit
                .iter()
                .map(|&(x, w)| {
                    let phi = std::f64::consts::FRAC_PI_2 - x * scale;
                    let c = phi.cos();
                    let s = phi.sin();
                    w * scale * c * c * s * s * (-a * c * c).exp()
                })
                .sum()
        }
    }
}

/// Ball integral `int_{|xi| < R} exp(-1/2 xi^T (B (x) I_3) xi) d^6 xi`:
/// diagonalize the 2x2 form (the label rotation is norm-preserving) and
/// integrate the two radial profiles over the 6D ball in polar form. When the
/// ball already holds all the mass the closed-form full-space value is used.
fn ball_integral(b: &Matrix2<f64>, rule: &BallRule) -> f64 {
    let (b_min, b_max) = eigenvalues_2x2(b);
    let rho_all = (160.0 / b_min).sqrt();
    if rho_all < rule.r {
        // e^{-b_min rho^2 / 2} <= e^{-80} outside the ball: all mass inside
        return (2.0 * std::f64::consts::PI).powi(3) / b.determinant().powf(1.5);
    }
    let mut total = 0.0;
    for &(x, w) in &rule.unit {
        let rho = x * rule.r;
        let rho2 = rho * rho;
        let a = 0.5 * rho2 * (b_max - b_min);
        total += w * rule.r * rho2 * rho2 * rho * (-0.5 * rho2 * b_min).exp() * rule.angular(a);
    }
    let four_pi_sq = (4.0 * std::f64::consts::PI) * (4.0 * std::f64::consts::PI);
    four_pi_sq * total
}

/// `I_R = int_{|xi| < R} |psi|^2 d xi` of the normalized variational state.
pub fn spreading_metric(vr: &VariationalResult, basis: &GaussianBasis, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("R must be > 0, got {r}")));
    }
    let n = basis.len();
    if vr.coefficients.len() != n {
        return Err(Error::Input(format!(
            "coefficient length {} does not match basis size {n}",
            vr.coefficients.len()
        )));
    }
    let rule = BallRule::new(r);
    let norms: Vec<f64> = basis.forms.iter().map(norm_factor).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    // parallel map, then an index-ordered sequential sum: float accumulation
    // must not depend on the thread count
    let terms: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let ci = vr.coefficients[i] * norms[i];
            let cj = vr.coefficients[j] * norms[j];
            let b = basis.forms[i] + basis.forms[j];
            let s_raw = (2.0 * std::f64::consts::PI).powi(3) / b.determinant().powf(1.5);
            let w = if i == j { 1.0 } else { 2.0 };
            // pairs with negligible mutual overlap cannot move I_R
            if (ci * cj * s_raw).abs() < 1e-16 {
                return (0.0, w * ci * cj * s_raw);
            }
            let ball = ball_integral(&b, &rule);
            (w * ci * cj * ball, w * ci * cj * s_raw)
        })
        .collect();
    let (num, den) = terms.iter().fold((0.0, 0.0), |a, t| (a.0 + t.0, a.1 + t.1));
    if !(den > 0.0) {
        return Err(Error::Accuracy(format!(
            "state norm {den:.3e} is not positive"
        )));
    }
    let i_r = num / den;
    if !(-1e-9..=1.0 + 1e-9).contains(&i_r) {
        return Err(Error::Accuracy(format!(
            "I_R = {i_r} fell outside [0, 1]; quadrature failed"
        )));
    }
    Ok(i_r.clamp(0.0, 1.0))
}

/// Second moment `<|xi|^2>` of the normalized state, closed form.
pub fn xi2_moment(vr: &VariationalResult, basis: &GaussianBasis) -> Result<f64> {
    let n = basis.len();
    if vr.coefficients.len() != n {
        return Err(Error::Input("coefficient/basis size mismatch".into()));
    }
    let norms: Vec<f64> = basis.forms.iter().map(norm_factor).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in 0..n {
            let b = basis.forms[i] + basis.forms[j];
            let s_raw = (2.0 * std::f64::consts::PI).powi(3) / b.determinant().powf(1.5);
            let c = vr.coefficients[i] * norms[i] * vr.coefficients[j] * norms[j] * s_raw;
            num += c * 3.0 * b.try_inverse().unwrap_or_else(Matrix2::zeros).trace();
            den += c;
        }
    }
    if !(den > 0.0) {
        return Err(Error::Accuracy("state norm is not positive".into()));
    }
    Ok(num / den)
}

/// Everything fixed about one scan: frame, potentials, and the basis.
pub struct ScanContext {
    pub frame: JacobiFrame,
    pub potentials: ThreeBodyPotentials,
    pub basis: GaussianBasis,
}

impl ScanContext {
    pub fn new(
        frame: JacobiFrame,
        potentials: ThreeBodyPotentials,
        recipe: &BasisRecipe,
    ) -> Result<Self> {
        Ok(Self {
            frame,
            potentials,
            basis: GaussianBasis::generate(recipe, &frame)?,
        })
    }

    pub fn solve(&self, theta: f64, lambda: f64) -> Result<VariationalResult> {
        let (h, s) = hamiltonian_elements(
            &self.basis.forms,
            &self.frame,
            &self.potentials,
            theta,
            lambda,
        )?;
        ground_state(&h, &s)
    }
}

/// Scan output: records plus the refined binding onset.
#[derive(Debug, Clone)]
pub struct ThetaScan {
    pub records: Vec<ScanRecord>,
    pub theta0: f64,
    pub tol_bind: f64,
}

/// Sweeps `E_gr(Theta)` at fixed Lambda over the grid, enforces variational
/// monotonicity, and bisection-refines the boundary `Theta_0` between
/// `E_gr > -tol_bind` and `E_gr < -tol_bind`.
pub fn theta_scan(
    ctx: &ScanContext,
    theta_grid: &[f64],
    lambda: f64,
    r_list: &[f64],
    tol_bind: f64,
) -> Result<ThetaScan> {
    if theta_grid.len() < 2 {
        return Err(Error::Domain("theta grid needs at least two points".into()));
    }
    if theta_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "theta grid must be strictly increasing".into(),
        ));
    }
    let mut records = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let vr = ctx.solve(theta, lambda)?;
        let i_r = r_list
            .iter()
            .map(|&r| spreading_metric(&vr, &ctx.basis, r))
            .collect::<Result<Vec<f64>>>()?;
        let xi2 = xi2_moment(&vr, &ctx.basis)?;
        records.push(ScanRecord {
            theta,
            lambda,
            e_gr: vr.e_gr,
            i_r,
            xi2_moment: xi2,
            basis_size: vr.basis_size,
            kept: vr.kept,
            overlap_condition: vr.overlap_condition,
        });
    }
    // adding attraction can only lower the ground state
    for w in records.windows(2) {
        let slack = 1e-10 * (1.0 + w[0].e_gr.abs());
        if w[1].e_gr > w[0].e_gr + slack {
            return Err(Error::Convergence(format!(
                "E_gr increased from {:.6e} to {:.6e} between theta = {:.6} and {:.6}; \
                 basis too small",
                w[0].e_gr, w[1].e_gr, w[0].theta, w[1].theta
            )));
        }
    }
    // locate the straddle and bisect
    let bound = |e: f64| e < -tol_bind;
    let first_bound = records.iter().position(|r| bound(r.e_gr));
    let theta0 = match first_bound {
        None => {
            return Err(Error::Convergence(
                "no binding onset inside the theta grid".into(),
            ))
        }
        Some(0) => {
            return Err(Error::Convergence(
                "already bound at the first theta point; extend the grid downward".into(),
            ))
        }
        Some(idx) => {
            let mut lo = records[idx - 1].theta;
            let mut hi = records[idx].theta;
            for _ in 0..25 {
                let mid = 0.5 * (lo + hi);
                let vr = ctx.solve(mid, lambda)?;
                if bound(vr.e_gr) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(ThetaScan {
        records,
        theta0,
        tol_bind,
    })
}

/// Empirical size of the coupling box where the spectrum stays nonnegative:
/// the largest probe `c` (as a fraction of the smaller subthreshold) with
/// `E_gr(c, c) >= -tol_bind`.
pub fn empirical_epsilon(
    ctx: &ScanContext,
    sub: &SubThresholds,
    fractions: &[f64],
    tol_bind: f64,
) -> Result<f64> {
    let cap = sub.theta_cr.min(sub.lambda_cr);
    let mut best = None;
    for &f in fractions {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon probe fraction {f} must lie in (0, 1)"
            )));
        }
        let c = f * cap;
        let vr = ctx.solve(c, c)?;
        if vr.e_gr >= -tol_bind {
            best = Some(c);
        } else {
            break;
        }
    }
    best.ok_or_else(|| Error::Convergence("even the smallest probe coupling already binds".into()))
}
