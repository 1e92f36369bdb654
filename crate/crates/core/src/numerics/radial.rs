//! Numerov integration of the reduced radial equation at zero angular
//! momentum: `u'' = (kappa^2 - V(r)) u`.
//!
//! This integrator is the shooting oracle that cross-checks every
//! Birman-Schwinger result along an independent route, so it deliberately
//! shares no code with the integral-equation side. Besides the spec-level
//! [`radial_integrate`], segment primitives are exposed so callers can stop
//! at a potential discontinuity (integrating across a jump costs an O(h)
//! bias) and so bound states can be matched from both sides (an outward-only
//! sweep is contaminated by the growing exponential in the tail).

use crate::error::{Error, Result};

/// Outcome of one outward integration.
#[derive(Debug, Clone, Copy)]
pub struct RadialSolution {
    /// Logarithmic derivative `u'/u` at the right end.
    pub log_derivative: f64,
    /// Number of interior sign changes of `u`.
    pub nodes: usize,
    /// Raw end values, for sign-based threshold detection.
    pub u_end: f64,
    pub du_end: f64,
}

/// Numerov sweep over `[a, b]` given the first two samples `u(a)`, `u(a+h)`
/// and the launch slope `u'(a)`. Returns `(u(b), u'(b), nodes, h^2 max|w|)`.
///
/// The end derivative comes from the integral identity
/// `u'(b) = u'(a) + int_a^b w u dr` accumulated with composite Simpson,
/// which is immune to the roundoff amplification of finite differencing
/// (dividing recurrence noise by h destroys shallow-state roots). `steps`
/// must be even for the Simpson pattern.
fn numerov_sweep<V: Fn(f64) -> f64>(
    potential: &V,
    energy: f64,
    a: f64,
    b: f64,
    steps: usize,
    u0: f64,
    u1: f64,
    du0: f64,
) -> (f64, f64, usize, f64) {
    debug_assert!(steps % 2 == 0);
    let h = (b - a) / steps as f64;
    let h2 = h * h;
    let w = |r: f64| -(energy + potential(r));
    // nodes as exact interval fractions: the endpoint lands exactly on `b`,
    // so a potential discontinuity at the boundary is sampled consistently
    // instead of flipping on floating-point dust
    let node = |i: usize| a + (b - a) * (i as f64 / steps as f64);
    let mut w_prev = w(a);
    let mut w_curr = w(node(1));
    let mut w_scale = w_prev.abs().max(w_curr.abs());
    let mut u_prev = u0;
    let mut u_curr = u1;
    // Simpson accumulation of w u: coefficients 1,4,2,...,4,1
    let mut integral = w_prev * u_prev + 4.0 * w_curr * u_curr;
    // cumulative overflow-rescale factor applied to the running solution
    let mut launch_scale = 1.0;
    let mut nodes = 0usize;
    for i in 1..steps {
        let w_next = w(node(i + 1));
        w_scale = w_scale.max(w_next.abs());
        let u_next = (2.0 * u_curr * (1.0 + 5.0 * h2 * w_curr / 12.0)
            - u_prev * (1.0 - h2 * w_prev / 12.0))
            / (1.0 - h2 * w_next / 12.0);
        if u_next * u_curr < 0.0 {
            nodes += 1;
        }
        u_prev = u_curr;
        u_curr = u_next;
        w_prev = w_curr;
        w_curr = w_next;
        let coeff = if i + 1 == steps {
            1.0
        } else if (i + 1) % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += coeff * w_curr * u_curr;
        if u_curr.abs() > 1e200 {
            // rescale against overflow deep in a forbidden region
            u_prev *= 1e-200;
            u_curr *= 1e-200;
            integral *= 1e-200;
            launch_scale *= 1e-200;
        }
    }
    let du = du0 * launch_scale + integral * h / 3.0;
    (u_curr, du, nodes, h2 * w_scale)
}

/// Outward sweep from the origin with the regular launch `u = r + w r^3/6`.
pub fn numerov_outward<V: Fn(f64) -> f64>(
    potential: &V,
    energy: f64,
    b: f64,
    steps: usize,
) -> Result<RadialSolution> {
    if !(energy <= 0.0 && energy.is_finite()) {
        return Err(Error::Domain(format!(
            "energy must be <= 0 and finite, got {energy}"
        )));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("endpoint must be > 0, got {b}")));
    }
    if steps < 16 {
        return Err(Error::Domain("need at least 16 steps".into()));
    }
    let steps = steps + steps % 2;
    let h = b / steps as f64;
    let w0 = -(energy + potential(0.0));
    let u1 = h * (1.0 + h * h * w0 / 6.0);
    let (u_end, du_end, nodes, resolution) =
        numerov_sweep(potential, energy, 0.0, b, steps, 0.0, u1, 1.0);
    if resolution > 0.5 {
        return Err(Error::Accuracy(format!(
            "step too coarse: h^2 max|w| = {resolution:.3e} > 0.5; increase steps"
        )));
    }
    Ok(RadialSolution {
        log_derivative: du_end / u_end,
        nodes,
        u_end,
        du_end,
    })
}

/// Inward sweep from `b` down to `a` launched on the decaying tail solution
/// `u = e^{-kappa r}`; returns the logarithmic derivative `u'/u` at `a`.
/// Runs the recursion in the reflected coordinate, where the decaying
/// solution grows and the sweep is numerically stable.
pub fn numerov_inward_log_derivative<V: Fn(f64) -> f64>(
    potential: &V,
    kappa: f64,
    a: f64,
    b: f64,
    steps: usize,
) -> Result<f64> {
    if !(kappa > 0.0 && a >= 0.0 && b > a) {
        return Err(Error::Domain(format!(
            "need kappa > 0 and 0 <= a < b, got kappa = {kappa}, [{a}, {b}]"
        )));
    }
    let energy = -kappa * kappa;
    // reflected problem: s = a + b - r, same equation with mirrored potential
    let mirrored = |s: f64| potential(a + b - s);
    let steps = steps + steps % 2;
    let h = (b - a) / steps as f64;
    let u0 = 1.0;
    let u1 = (kappa * h).exp(); // e^{-kappa r} grows in s
    let (u_end, du_end, _nodes, resolution) =
        numerov_sweep(&mirrored, energy, a, b, steps, u0, u1, kappa);
    if resolution > 0.5 {
        return Err(Error::Accuracy(format!(
            "step too coarse: h^2 max|w| = {resolution:.3e} > 0.5; increase steps"
        )));
    }
    // d/dr = -d/ds
    Ok(-du_end / u_end)
}

/// Integrates `-u'' - V(r) u = E u` outward from `u(0) = 0` and reports the
/// logarithmic derivative at `r_max` and the interior node count.
///
/// `potential` must already contain every coupling factor. Fourth-order
/// (Numerov) accuracy; the step must resolve the local wavelength or an
/// accuracy error is returned.
pub fn radial_integrate<V: Fn(f64) -> f64>(
    potential: V,
    energy: f64,
    r_max: f64,
    steps: usize,
) -> Result<RadialSolution> {
    numerov_outward(&potential, energy, r_max, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairPotential;
    use approx::assert_relative_eq;

    #[test]
    fn free_solution_is_linear() {
        let sol = radial_integrate(|_| 0.0, 0.0, 10.0, 2000).unwrap();
        assert_relative_eq!(sol.log_derivative, 0.1, max_relative = 1e-10);
        assert_eq!(sol.nodes, 0);
    }

    #[test]
    fn square_well_threshold_signature() {
        // V0 = pi^2/4 on [0,1] puts the zero-energy solution sin(pi r / 2)
        // exactly at threshold: u'(1) = 0.
        let v0 = std::f64::consts::PI.powi(2) / 4.0;
        let p = PairPotential::square_well(v0, 1.0).unwrap();
        let sol = radial_integrate(|r| p.eval_unchecked(r), 0.0, 1.0, 4000).unwrap();
        assert!(sol.log_derivative.abs() < 1e-8, "{}", sol.log_derivative);
    }

    #[test]
    fn deep_square_well_bound_state_matches_transcendental_root() {
        // V0 = pi^2: kappa solves q cot q = -kappa, q = sqrt(V0 - kappa^2).
        // Integrate only over the well interior and match the analytic
        // exterior log-derivative -kappa at the edge.
        let v0 = std::f64::consts::PI.powi(2);
        let p = PairPotential::square_well(v0, 1.0).unwrap();
        let mismatch = |kappa: f64| {
            let e = -kappa * kappa;
            let sol = numerov_outward(&|r| p.eval_unchecked(r), e, 1.0, 5000).unwrap();
            sol.log_derivative + kappa
        };
        let kappa = crate::numerics::brent_root(mismatch, 0.5, 3.0, 1e-13).unwrap();
        let analytic = crate::numerics::brent_root(
            |k: f64| {
                let q = (v0 - k * k).sqrt();
                q / q.tan() + k
            },
            0.5,
            3.0,
            1e-14,
        )
        .unwrap();
        assert_relative_eq!(kappa, analytic, max_relative = 1e-9);
    }

    #[test]
    fn two_sided_match_reproduces_gaussian_ground_state() {
        // two-sided eigensolve for a smooth potential: scan the matching
        // function for its ground-state crossing (away from the root it has
        // node poles), refine with Brent, and confirm stability under
        // resolution doubling
        let p = PairPotential::gaussian(10.0, 1.0).unwrap();
        let r_match = 1.5;
        let r_max = 18.0;
        let make_g = |steps_out: usize, steps_in: usize| {
            move |kappa: f64| {
                let e = -kappa * kappa;
                let out = numerov_outward(&|r| p.eval_unchecked(r), e, r_match, steps_out).unwrap();
                let inw = numerov_inward_log_derivative(
                    &|r| p.eval_unchecked(r),
                    kappa,
                    r_match,
                    r_max,
                    steps_in,
                )
                .unwrap();
                out.log_derivative - inw
            }
        };
        let g = make_g(4000, 8000);
        // locate the crossing where the outward solution is still nodeless
        let mut bracket = None;
        let mut prev_k = 0.2;
        let mut prev_g = g(prev_k);
        for i in 1..=80 {
            let k = 0.2 + (3.0 - 0.2) * i as f64 / 80.0;
            let cur = g(k);
            let nodeless = numerov_outward(&|r| p.eval_unchecked(r), -k * k, r_match, 4000)
                .unwrap()
                .nodes
                == 0;
            if prev_g * cur < 0.0 && nodeless && prev_g.abs() < 50.0 && cur.abs() < 50.0 {
                bracket = Some((prev_k, k));
            }
            prev_k = k;
            prev_g = cur;
        }
        let (lo, hi) = bracket.expect("ground-state crossing not found");
        let kappa = crate::numerics::brent_root(&g, lo, hi, 1e-13).unwrap();
        let g2 = make_g(5000, 12_000);
        let kappa2 = crate::numerics::brent_root(&g2, lo, hi, 1e-13).unwrap();
        assert_relative_eq!(kappa, kappa2, max_relative = 1e-8);
        // the matched state is the nodeless ground state
        let sol = numerov_outward(&|r| p.eval_unchecked(r), -kappa * kappa, r_match, 4000).unwrap();
        assert_eq!(sol.nodes, 0);
    }

    #[test]
    fn node_count_monotone_in_coupling() {
        let mut last = 0;
        for i in 0..30 {
            let lambda = 1.0 + i as f64 * 4.0;
            let p = PairPotential::gaussian(1.0, 1.0)
                .unwrap()
                .with_lambda(lambda)
                .unwrap();
            let sol = radial_integrate(|r| p.eval_unchecked(r), 0.0, 12.0, 6000).unwrap();
            assert!(
                sol.nodes >= last,
                "node count dropped: {} -> {} at lambda {lambda}",
                last,
                sol.nodes
            );
            last = sol.nodes;
        }
        assert!(last >= 2);
    }

    #[test]
    fn coarse_step_is_an_accuracy_error() {
        let p = PairPotential::square_well(1e6, 1.0).unwrap();
        assert!(matches!(
            radial_integrate(|r| p.eval_unchecked(r), 0.0, 10.0, 100),
            Err(Error::Accuracy(_))
        ));
    }

    #[test]
    fn rejects_positive_energy() {
        assert!(radial_integrate(|_| 0.0, 0.5, 1.0, 100).is_err());
    }
}
