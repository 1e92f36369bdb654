//! Numerical verification of the auxiliary analytic estimates: the
//! logarithmic divergence of the momentum integral `J_eps(z)`, the 6D free
//! Green's-function bound with its 256/9 constant, and the exponential kernel
//! inequality used for the lower bound on the singular part.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{brent_root, composite_gauss_legendre, gauss_legendre};

/// Radial profile `g(|y|)` for the divergence study: nonnegative, in
/// `L^1 \cap L^2`, not identically zero.
#[derive(Debug, Clone, Copy)]
pub enum RadialProfile {
    /// `A exp(-(r/w)^2)`
    Gaussian { amplitude: f64, width: f64 },
    /// `A exp(-r/w)`
    Exponential { amplitude: f64, width: f64 },
    /// `A` on `[0, radius]`, zero outside
    Truncated { amplitude: f64, radius: f64 },
}

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        let (a, w) = match *self {
            RadialProfile::Gaussian { amplitude, width }
            | RadialProfile::Exponential { amplitude, width } => (amplitude, width),
            RadialProfile::Truncated { amplitude, radius } => (amplitude, radius),
        };
        if !(a > 0.0 && a.is_finite() && w > 0.0 && w.is_finite()) {
            return Err(Error::Domain(format!(
                "profile parameters must be positive and finite: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Gaussian { amplitude, width } => {
                amplitude * (-(r / width).powi(2)).exp()
            }
            RadialProfile::Exponential { amplitude, width } => amplitude * (-r / width).exp(),
            RadialProfile::Truncated { amplitude, radius } => {
                if r <= radius {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius beyond which the profile is negligible (exactly zero for the
    /// truncated profile).
    fn support_radius(&self) -> f64 {
        match *self {
            RadialProfile::Gaussian { width, .. } => 9.0 * width,
            RadialProfile::Exponential { width, .. } => 42.0 * width,
            RadialProfile::Truncated { radius, .. } => radius,
        }
    }

    /// Precomputed radial quadrature table `(r_i, w_i r_i^2 g(r_i))`; one
    /// table serves every transform evaluation of this profile.
    pub fn table(&self) -> RadialTable {
        let rule = gauss_legendre(400, 0.0, self.support_radius()).unwrap();
        RadialTable {
            rw: rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&r, &w)| (r, w * r * r * self.eval(r)))
                .collect(),
        }
    }

    /// `|g|_1 = 4 pi int r^2 g dr`, by quadrature.
    pub fn l1_norm(&self) -> f64 {
        self.table().fourier(0.0)
    }

    /// Unnormalized 3D Fourier transform restricted to radial profiles:
    /// `g_hat(p) = (4 pi / p) int r sin(p r) g(r) dr`, evaluated as
    /// `4 pi int r^2 sinc(p r) g(r) dr` so the `p -> 0` limit is regular.
    pub fn fourier(&self, p: f64) -> f64 {
        self.table().fourier(p)
    }

    /// Closed-form transform, available for the gaussian profile only; used
    /// as the self-test oracle of the quadrature path.
    pub fn fourier_analytic(&self, p: f64) -> Option<f64> {
        match *self {
            RadialProfile::Gaussian { amplitude, width } => {
                let pi = std::f64::consts::PI;
                Some(
                    amplitude * pi.powf(1.5) * width.powi(3) * (-p * p * width * width / 4.0).exp(),
                )
            }
            _ => None,
        }
    }
}

/// Radial quadrature table of a profile; evaluates its Fourier transform.
#[derive(Debug, Clone)]
pub struct RadialTable {
    rw: Vec<(f64, f64)>,
}

impl RadialTable {
    pub fn fourier(&self, p: f64) -> f64 {
        4.0 * std::f64::consts::PI * self.rw.iter().map(|&(r, wg)| wg * sinc(p * r)).sum::<f64>()
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `J_eps(z) = int_{|p| <= eps0} |g_hat|^2 / (p^2 + z^2)^{3/2} d^3p` by
/// radial quadrature, with the near-origin annuli refined geometrically down
/// to the scale of `z`.
pub fn lemma3_integral(g: &RadialProfile, eps0: f64, z: f64) -> Result<f64> {
    g.validate()?;
    lemma3_integral_with(&g.table(), eps0, z)
}

/// Same integral over a prebuilt transform table.
pub fn lemma3_integral_with(table: &RadialTable, eps0: f64, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("z must be > 0, got {z}")));
    }
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::Domain(format!("eps0 must be > 0, got {eps0}")));
    }
    // geometric edges eps0, eps0/2, ... down to below z/4, then [0, last]
    let mut edges = vec![eps0];
    let mut e = eps0;
    while e > z / 4.0 {
        e /= 2.0;
        edges.push(e);
    }
    edges.push(0.0);
    edges.reverse();
    let rule = composite_gauss_legendre(&edges, 16)?;
    let j = rule.integrate(|p| {
        let gh = table.fourier(p);
        p * p * gh * gh / (p * p + z * z).powf(1.5)
    }) * 4.0
        * std::f64::consts::PI;
    if !j.is_finite() {
        return Err(Error::Accuracy(format!(
            "J integral did not converge at z = {z:.3e}"
        )));
    }
    Ok(j)
}

/// Analytic value of `int_{|p| < eps} (p^2 + z^2)^{-3/2} d^3p`.
pub fn singular_ball_integral(eps: f64, z: f64) -> f64 {
    let s = (eps * eps + z * z).sqrt();
    4.0 * std::f64::consts::PI * (((eps + s) / z).ln() - eps / s)
}

/// Radius `r` with `int_{|y| > r} g = |g|_1 / 4` (the smallest such radius),
/// fixed by bisection on the cumulative radial integral.
pub fn three_quarter_radius(g: &RadialProfile) -> Result<f64> {
    let l1 = g.l1_norm();
    let hi = g.support_radius();
    let cumulative = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let rule = gauss_legendre(400, 0.0, r).unwrap();
        4.0 * std::f64::consts::PI * rule.integrate(|s| s * s * g.eval(s))
    };
    brent_root(|r| cumulative(r) - 0.75 * l1, 1e-9 * hi, hi, 1e-12 * hi)
}

/// One sampled row of the divergence study.
#[derive(Debug, Clone, Copy)]
pub struct DivergenceRow {
    pub z: f64,
    /// `J_{eps0}(z)`
    pub j: f64,
    /// `J_eps(z)` at the reduced radius `eps = min(eps0, pi/(3r))`
    pub j_reduced: f64,
    /// the lower bound `(|g|_1^2 / 64) int_{|p|<eps} (p^2+z^2)^{-3/2}`
    pub lower_bound: f64,
}

/// Full divergence report: sampled integrals, the log-linear fit, and the
/// worst lower-bound margin.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub rows: Vec<DivergenceRow>,
    /// slope of J against ln(1/z)
    pub slope: f64,
    pub intercept: f64,
    /// coefficient of determination of the linear fit
    pub r_squared: f64,
    pub fit_rms: f64,
    /// expected slope `4 pi |g_hat(0)|^2`
    pub slope_expected: f64,
    /// min over rows of `j_reduced / lower_bound`; >= 1 when the bound holds
    pub bound_margin: f64,
    /// the reduced integration radius used for the bound
    pub eps_reduced: f64,
}

/// Samples `J(z)` over `z_list`, fits `J` against `ln(1/z)`, and checks the
/// closed-form lower bound at the reduced radius.
pub fn divergence_report(g: &RadialProfile, eps0: f64, z_list: &[f64]) -> Result<DivergenceReport> {
    if z_list.len() < 3 {
        return Err(Error::Domain("need at least three z samples".into()));
    }
    let r34 = three_quarter_radius(g)?;
    let eps_reduced = eps0.min(std::f64::consts::PI / (3.0 * r34));
    let table = g.table();
    let l1 = table.fourier(0.0);
    let mut rows = Vec::with_capacity(z_list.len());
    for &z in z_list {
        let j = lemma3_integral_with(&table, eps0, z)?;
        let j_reduced = lemma3_integral_with(&table, eps_reduced, z)?;
        let lower_bound = l1 * l1 / 64.0 * singular_ball_integral(eps_reduced, z);
        rows.push(DivergenceRow {
            z,
            j,
            j_reduced,
            lower_bound,
        });
    }
    // least squares of J against x = ln(1/z)
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.z).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.j).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let mean_y = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = 1.0 - ss_res / ss_tot;
    let gh0 = table.fourier(0.0);
    let slope_expected = 4.0 * std::f64::consts::PI * gh0 * gh0;
    let bound_margin = rows
        .iter()
        .map(|r| r.j_reduced / r.lower_bound)
        .fold(f64::INFINITY, f64::min);
    Ok(DivergenceReport {
        rows,
        slope,
        intercept,
        r_squared,
        fit_rms: (ss_res / n).sqrt(),
        slope_expected,
        bound_margin,
        eps_reduced,
    })
}

/// `int_0^inf t^{-3} exp(phi(t)) dt` on a logarithmic grid: substitute
/// `t = e^v`, locate the exponent maximum, and integrate a window wide enough
/// that the end contributions are below 1e-30 of the peak. Panel count is
/// doubled until the result is stable to `tol` relatively.
fn log_t_integral<F: Fn(f64) -> f64>(phi: F, tol: f64) -> Result<f64> {
    let h = |v: f64| -2.0 * v + phi(v.exp());
    // coarse scan for the exponent maximum
    let mut v_star = 0.0;
    let mut h_star = f64::NEG_INFINITY;
    let mut v = -60.0;
    while v <= 60.0 {
        let hv = h(v);
        if hv > h_star {
            h_star = hv;
            v_star = v;
        }
        v += 0.05;
    }
    if !h_star.is_finite() {
        return Err(Error::Accuracy("integrand has no finite maximum".into()));
    }
    let mut lo = v_star;
    while h(lo) > h_star - 75.0 && lo > -400.0 {
        lo -= 0.5;
    }
    let mut hi = v_star;
    while h(hi) > h_star - 75.0 && hi < 400.0 {
        hi += 0.5;
    }
    let mut prev = f64::NAN;
    let mut panels = 8;
    for _ in 0..12 {
        let edges: Vec<f64> = (0..=panels)
            .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
            .collect();
        let rule = composite_gauss_legendre(&edges, 16)?;
        // factor out the peak to stay in range
        let val = rule.integrate(|v| (h(v) - h_star).exp()) * h_star.exp();
        if prev.is_finite() && (val - prev).abs() <= tol * val.abs() {
            return Ok(val);
        }
        prev = val;
        panels *= 2;
    }
    Err(Error::Accuracy(format!(
        "log-grid quadrature did not stabilize to {tol:.1e}"
    )))
}

/// The identity integral from the Green's-function bound:
/// `int_0^inf t^{-3} exp(-3/(16 t)) dt`, exactly 256/9.
pub fn heat_identity_integral(tol: f64) -> Result<f64> {
    log_t_integral(|t| -3.0 / (16.0 * t), tol)
}

/// 6D free resolvent kernel `G_0(xi, 1)` at unit spectral shift through its
/// heat-kernel representation
/// `G_0 = (4 pi)^{-3} |xi|^{-4} e^{-|xi|/2} int t^{-3} e^{|xi|/2 - t |xi|^2 - 1/(4t)} dt`.
pub fn green6d(xi_norm: f64) -> Result<f64> {
    green6d_with_tol(xi_norm, 1e-12)
}

pub fn green6d_with_tol(xi_norm: f64, tol: f64) -> Result<f64> {
    if !(xi_norm > 0.0 && xi_norm.is_finite()) {
        return Err(Error::Domain(format!("xi norm must be > 0, got {xi_norm}")));
    }
    let x = xi_norm;
    let integral = log_t_integral(|t| x / 2.0 - t * x * x - 1.0 / (4.0 * t), tol)?;
    let pref = (4.0 * std::f64::consts::PI).powi(3);
    Ok(integral * (-x / 2.0).exp() / (pref * x.powi(4)))
}

/// The printed closed-form bound `4 / (9 pi |xi|^4) e^{-|xi|/2}`.
pub fn green6d_bound(xi_norm: f64) -> f64 {
    4.0 / (9.0 * std::f64::consts::PI * xi_norm.powi(4)) * (-xi_norm / 2.0).exp()
}

/// Report of the exponential-kernel inequality check
/// `e^{-d|x-x'|}/|x-x'| >= e^{-2 d |x|} / (2 |x|)` for `|x| >= R0 >= |x'|`.
#[derive(Debug, Clone, Copy)]
pub struct ZabyvReport {
    pub min_ratio: f64,
    pub all_pass: bool,
    pub samples: usize,
}

/// Monte Carlo check of the kernel inequality with a fixed seed, plus the
/// deterministic collinear worst case `x' = -R0 x/|x|`.
pub fn zabyv_check(r0: f64, delta: f64, samples: usize, seed: u64) -> Result<ZabyvReport> {
    if !(r0 > 0.0 && delta > 0.0) {
        return Err(Error::Domain(format!(
            "need R0 > 0 and delta > 0, got R0 = {r0}, delta = {delta}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut ChaCha8Rng| -> [f64; 3] {
        loop {
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n2: f64 = v.iter().map(|x| x * x).sum();
            if n2 > 1e-12 && n2 <= 1.0 {
                let n = n2.sqrt();
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    };
    let ratio = |x: [f64; 3], xp: [f64; 3]| -> f64 {
        let dx = [x[0] - xp[0], x[1] - xp[1], x[2] - xp[2]];
        let d = (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt();
        let nx = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let lhs = (-delta * d).exp() / d;
        let rhs = (-2.0 * delta * nx).exp() / (2.0 * nx);
        lhs / rhs
    };
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let ex: f64 = -(1.0 - rng.gen_range(0.0..1.0f64)).ln();
        let rx = r0 * (1.0 + ex);
        let ux = unit(&mut rng);
        let x = [rx * ux[0], rx * ux[1], rx * ux[2]];
        let rp = r0 * rng.gen_range(0.0..1.0f64).cbrt();
        let up = unit(&mut rng);
        let xp = [rp * up[0], rp * up[1], rp * up[2]];
        min_ratio = min_ratio.min(ratio(x, xp));
        // collinear worst case for the same |x|
        let worst = [-r0 * ux[0], -r0 * ux[1], -r0 * ux[2]];
        min_ratio = min_ratio.min(ratio(x, worst));
    }
    Ok(ZabyvReport {
        min_ratio,
        all_pass: min_ratio >= 1.0,
        samples,
    })
}
