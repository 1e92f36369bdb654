//! The s-wave Birman-Schwinger laboratory.
//!
//! For a nonnegative radial potential V the operator
//! `L(k) = sqrt(V) (-Lap + k^2)^{-1} sqrt(V)` restricted to the s-wave sector
//! becomes a one-dimensional integral operator on `(0, inf)` with kernel
//! `G_k(r, r') = (exp(-k|r-r'|) - exp(-k(r+r')))/(2k)` and
//! `G_0(r, r') = min(r, r')`. Everything here is built on its Nystrom
//! discretization over a composite Gauss-Legendre grid.
//!
//! The kernel has a derivative kink across the diagonal, which caps plain
//! Nystrom eigenvalue accuracy at O(h^2) regardless of the panel order. All
//! scalar spectral quantities are therefore evaluated on a fine/coarse grid
//! pair sharing the same panel structure and Richardson-extrapolated, which
//! restores O(h^4)-class accuracy. Vector quantities (the resonance function,
//! projectors, W and Z matrices) live on the fine grid, at the fine grid's
//! own critical coupling, so that every intra-grid identity holds to machine
//! precision.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{PairPotential, Shape};
use crate::numerics::{
    brent_root, composite_gauss_legendre, numerov_inward_log_derivative, numerov_outward,
    sym_eig_top, top_eigenpair_nonneg, top_two_eigenvalues, QuadratureRule,
};

/// Spectral gap below which the dominant eigenvalue is no longer considered
/// isolated when estimating the validity radius rho_0.
pub const GAP_MIN: f64 = 0.05;

/// Nodes per quadrature panel.
const NODES_PER_PANEL: usize = 10;

/// Composite radial grid for the Birman-Schwinger kernel: a fine rule plus a
/// structurally identical rule with half the panels, for Richardson
/// extrapolation of eigenvalue curves.
#[derive(Debug, Clone)]
pub struct BsGrid {
    pub fine: QuadratureRule,
    pub coarse: QuadratureRule,
    pub r_max: f64,
    /// requested node count (the fine rule holds the actual one)
    pub n_requested: usize,
}

impl BsGrid {
    /// Builds a grid adapted to the potential's structure. Panel edges are
    /// aligned to the well range (essential for the square well, whose edge
    /// otherwise destroys quadrature convergence), panels are denser where
    /// the potential lives, and `r_max = 20 / b2`.
    pub fn for_potential(p: &PairPotential, n_nodes: usize) -> Result<Self> {
        let r_max = 20.0 / p.b2;
        Self::with_r_max(p, n_nodes, r_max)
    }

    pub fn with_r_max(p: &PairPotential, n_nodes: usize, r_max: f64) -> Result<Self> {
        if n_nodes < 40 {
            return Err(Error::Domain("need at least 40 radial nodes".into()));
        }
        if !(r_max > p.range) {
            return Err(Error::Domain(format!(
                "r_max = {r_max} must exceed the potential range {}",
                p.range
            )));
        }
        let r = p.range.min(0.9 * r_max);
        // structural blocks with density weights; the first edge sits on the
        // potential range
        let blocks: Vec<(f64, f64, f64)> = if r_max <= 4.0 * r {
            vec![(0.0, r, 0.8), (r, r_max, 0.2)]
        } else {
            vec![
                (0.0, r, 0.30),
                (r, 2.0 * r, 0.25),
                (2.0 * r, (4.0 * r).min(0.5 * r_max), 0.20),
                (
                    (4.0 * r).min(0.5 * r_max),
                    (8.0 * r).min(0.75 * r_max),
                    0.15,
                ),
                ((8.0 * r).min(0.75 * r_max), r_max, 0.10),
            ]
        };
        let total_panels = (n_nodes / NODES_PER_PANEL).max(2 * blocks.len());
        let mut edges_fine = vec![0.0];
        let mut edges_coarse = vec![0.0];
        for (lo, hi, wgt) in &blocks {
            // even panel count per block so the coarse sibling exists
            let q = ((wgt * total_panels as f64 / 2.0).round() as usize).max(1) * 2;
            for j in 1..=q {
                edges_fine.push(lo + (hi - lo) * j as f64 / q as f64);
            }
            for j in 1..=q / 2 {
                edges_coarse.push(lo + (hi - lo) * j as f64 / (q / 2) as f64);
            }
        }
        Ok(Self {
            fine: composite_gauss_legendre(&edges_fine, NODES_PER_PANEL)?,
            coarse: composite_gauss_legendre(&edges_coarse, NODES_PER_PANEL)?,
            r_max,
            n_requested: n_nodes,
        })
    }

    pub fn n_fine(&self) -> usize {
        self.fine.len()
    }
}

/// s-wave Green's function of `(-d^2/dr^2 + k^2)` on the half line with a
/// Dirichlet wall at the origin. The `k -> 0` limit is hard-coded as
/// `min(r, r')`; for `k > 0` the difference of exponentials is evaluated in
/// the cancellation-safe `exp(-k d) * (-expm1(-2 k r_min)) / (2k)` form.
#[inline]
pub fn green_swave(k: f64, r: f64, rp: f64) -> f64 {
    if k == 0.0 {
        r.min(rp)
    } else {
        let d = (r - rp).abs();
        let rmin = 0.5 * ((r + rp) - d);
        (-k * d).exp() * (-(-2.0 * k * rmin).exp_m1()) / (2.0 * k)
    }
}

/// Nystrom matrix of `L(k)`: `M_ij = sqrt(w_i V_i) G_k(r_i, r_j) sqrt(V_j w_j)`.
#[derive(Debug, Clone)]
pub struct BsMatrix {
    pub k: f64,
    pub matrix: DMatrix<f64>,
    /// false when `r_max < 20 / b2`, i.e. the tail box is tighter than the
    /// falloff witnesses ask for
    pub r_max_adequate: bool,
}

/// Builds the Birman-Schwinger matrix of the potential at momentum `k >= 0`.
pub fn build_bs_matrix(p: &PairPotential, k: f64, rule: &QuadratureRule) -> Result<BsMatrix> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("momentum must be >= 0, got {k}")));
    }
    let n = rule.len();
    let mut sqv: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| (p.eval_unchecked(r) * w).sqrt())
        .collect();
    // flush rows where the potential is below 1e-16 of its peak to exact
    // zeros: they sit beneath the operator's floating-point resolution, and
    // the huge dynamic range of the raw tail entries breaks dense
    // eigensolvers; the induced eigenvalue perturbation is ~ N * 1e-16
    let sqv_max = sqv.iter().fold(0.0f64, |a, &b| a.max(b));
    for v in &mut sqv {
        if *v < sqv_max * 1e-8 {
            *v = 0.0;
        }
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        if sqv[i] == 0.0 {
            continue;
        }
        for j in 0..=i {
            let v = sqv[i] * sqv[j] * green_swave(k, rule.nodes[i], rule.nodes[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(BsMatrix {
        k,
        matrix: m,
        r_max_adequate: rule.b >= 20.0 / p.b2 - 1e-9,
    })
}

/// Eigenvalue engine over the fine/coarse pair.
struct Engine<'a> {
    p: &'a PairPotential,
    grid: &'a BsGrid,
}

impl<'a> Engine<'a> {
    fn new(p: &'a PairPotential, grid: &'a BsGrid) -> Self {
        Self { p, grid }
    }

    fn mu_fine(&self, k: f64) -> Result<f64> {
        let m = build_bs_matrix(self.p, k, &self.grid.fine)?;
        Ok(top_eigenpair_nonneg(&m.matrix, 1e-13).0)
    }

    fn mu_coarse(&self, k: f64) -> Result<f64> {
        let m = build_bs_matrix(self.p, k, &self.grid.coarse)?;
        Ok(top_eigenpair_nonneg(&m.matrix, 1e-13).0)
    }

    /// Richardson-extrapolated top eigenvalue of `L(k)`; the kink-limited
    /// O(h^2) Nystrom error cancels between the structurally similar grids.
    fn mu_extrapolated(&self, k: f64) -> Result<f64> {
        Ok((4.0 * self.mu_fine(k)? - self.mu_coarse(k)?) / 3.0)
    }
}

/// Critical coupling data. `lambda_cr` is the Richardson estimate of the
/// operator threshold; `lambda_cr_grid` is the fine grid's own critical
/// coupling (exactly `1/mu_max` of the fine matrix), which is the right
/// coupling for pinning discrete-operator studies at threshold.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub lambda_cr: f64,
    pub lambda_cr_grid: f64,
    pub lambda_cr_shooting: f64,
    /// top eigenvalue of L(0) as passed in (coupling included)
    pub mu_max: f64,
    /// bracket used by the shooting root
    pub bracket: (f64, f64),
    /// relative disagreement between the two routes
    pub cross_check_rel: f64,
}

/// Relative tolerance on the BS-vs-shooting threshold cross-check.
pub const THRESHOLD_XCHECK_TOL: f64 = 1e-5;

/// Locates the coupling-constant threshold `lambda_cr = lambda / mu_max(L(0))`
/// and cross-validates it against the zero-energy shooting oracle.
pub fn coupling_threshold(p: &PairPotential, grid: &BsGrid) -> Result<ThresholdResult> {
    if p.is_zero() {
        return Err(Error::Domain(
            "potential is identically zero; no threshold exists".into(),
        ));
    }
    let eng = Engine::new(p, grid);
    let mu_hat = eng.mu_extrapolated(0.0)?;
    let mu_fine = eng.mu_fine(0.0)?;
    if mu_hat <= 0.0 {
        return Err(Error::Domain(format!(
            "top eigenvalue of L(0) is {mu_hat}; potential must be attractive somewhere"
        )));
    }
    let lambda_cr = p.lambda / mu_hat;
    let lambda_cr_grid = p.lambda / mu_fine;

    // Independent oracle: outward zero-energy integration; u' changes sign at
    // the threshold coupling. For a compactly supported well the match point
    // is its edge (u' is constant beyond it, and stopping there keeps the
    // discontinuity out of the sweep); tails are integrated to r_max.
    let r_match = match p.shape {
        Shape::SquareWell => p.range,
        _ => grid.r_max,
    };
    let steps = shooting_steps(p, r_match, 0.0);
    let du_at = |lambda: f64| -> Result<f64> {
        let q = p.with_lambda(lambda)?;
        Ok(numerov_outward(&|r| q.eval_unchecked(r), 0.0, r_match, steps)?.du_end)
    };
    let (mut lo, mut hi) = (0.7 * lambda_cr, 1.3 * lambda_cr);
    for _ in 0..8 {
        if du_at(lo)? * du_at(hi)? < 0.0 {
            break;
        }
        lo *= 0.7;
        hi *= 1.3;
    }
    let f_lo = du_at(lo)?;
    if f_lo * du_at(hi)? > 0.0 {
        return Err(Error::Bracketing { lo, hi });
    }
    let lambda_cr_shooting =
        brent_root(|l| du_at(l).unwrap_or(f64::NAN), lo, hi, 1e-12 * lambda_cr)?;
    let rel = (lambda_cr - lambda_cr_shooting).abs() / lambda_cr;
    if rel > 10.0 * THRESHOLD_XCHECK_TOL {
        return Err(Error::Consistency(format!(
            "Birman-Schwinger threshold {lambda_cr:.10e} and shooting threshold \
             {lambda_cr_shooting:.10e} disagree by {rel:.3e} (limit {:.1e})",
            10.0 * THRESHOLD_XCHECK_TOL
        )));
    }
    Ok(ThresholdResult {
        lambda_cr,
        lambda_cr_grid,
        lambda_cr_shooting,
        mu_max: mu_hat,
        bracket: (lo, hi),
        cross_check_rel: rel,
    })
}

/// Numerov step count balancing truncation against recurrence roundoff,
/// which accumulates as phase noise ~ eps n^{3/2}/(q len). Past the optimum
/// more steps make the shooting WORSE; both error terms sit near 1e-11 for
/// unit-length wells around n ~ 1000.
fn shooting_steps(p: &PairPotential, length: f64, kappa: f64) -> usize {
    let w_max = p.eval_unchecked(0.0) + kappa * kappa;
    let per_wavelength = length * w_max.sqrt() * 100.0;
    (per_wavelength as usize).clamp(1200, 6000)
}

/// Discretized zero-energy resonance data at threshold coupling.
#[derive(Debug, Clone)]
pub struct ResonanceData {
    /// total coupling of the potential this was computed at
    pub lambda: f64,
    /// weights-embedded resonance vector, unit norm, entrywise nonnegative
    pub u0: DVector<f64>,
    /// slope coefficient of `mu(k) = 1 - a k + O(k^2)`
    pub a: f64,
    /// largest momentum keeping the dominant eigenvalue isolated by `GAP_MIN`
    pub rho0_est: f64,
    /// spectral gap `mu_1 - mu_2` at k = 0
    pub gap: f64,
    /// grid the vector lives on
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Extracts the dominant eigenpair of `L(0)` for a potential tuned to its
/// (fine-grid) critical coupling, together with the slope coefficient and an
/// operational estimate of the isolation radius rho_0.
pub fn resonance_function(p: &PairPotential, grid: &BsGrid) -> Result<ResonanceData> {
    let m0 = build_bs_matrix(p, 0.0, &grid.fine)?;
    let sol = sym_eig_top(&m0.matrix, 2, 1e-9)?;
    let (mu1, mu2) = (sol.values[0], sol.values[1]);
    if (mu1 - 1.0).abs() > 1e-8 {
        return Err(Error::Consistency(format!(
            "dominant eigenvalue {mu1:.12} is not 1 within 1e-8; tune the coupling to \
             lambda_cr_grid first"
        )));
    }
    let gap = mu1 - mu2;
    if gap < 1e-8 {
        return Err(Error::Degeneracy(format!(
            "top eigenvalue gap {gap:.3e} < 1e-8; positivity forbids this, so the \
             discretization is broken"
        )));
    }
    let mut u0 = sol.vectors.column(0).into_owned();
    // Perron vector: sign-normalize on the largest entry
    let imax = u0.iamax();
    if u0[imax] < 0.0 {
        u0 = -u0;
    }
    if u0.iter().any(|&x| x < -1e-10) {
        return Err(Error::Degeneracy(
            "dominant eigenvector has a negative entry beyond tolerance".into(),
        ));
    }
    u0 /= u0.norm();

    // rho0: scan k upward until the gap closes below GAP_MIN; cap at b2, the
    // analyticity radius of the kernel's exponential representation.
    let k_cap = p.b2;
    let mut rho0_est = 0.0;
    let n_scan = 40;
    for j in 0..n_scan {
        let k = k_cap * ((j + 1) as f64 / n_scan as f64);
        let mk = build_bs_matrix(p, k, &grid.fine)?;
        let (m1, m2, _) = top_two_eigenvalues(&mk.matrix, 1e-12);
        if m1 - m2 < GAP_MIN {
            break;
        }
        rho0_est = k;
    }
    if rho0_est == 0.0 {
        return Err(Error::Degeneracy(format!(
            "dominant eigenvalue not isolated even at k = {:.3e}",
            k_cap / n_scan as f64
        )));
    }

    let mut rd = ResonanceData {
        lambda: p.lambda,
        u0,
        a: 0.0,
        rho0_est,
        gap,
        nodes: grid.fine.nodes.clone(),
        weights: grid.fine.weights.clone(),
    };
    rd.a = a_coefficient(&rd, p)?;
    Ok(rd)
}

/// Slope coefficient `a` from the s-wave-reduced overlap integral
/// `a = (int_0^inf r sqrt(V(r)) u0(r) dr)^2`, the radial reduction of
/// `(phi_0, sqrt(V))^2 / (4 pi)`.
pub fn a_coefficient(rd: &ResonanceData, p: &PairPotential) -> Result<f64> {
    let integral: f64 = rd
        .nodes
        .iter()
        .zip(&rd.weights)
        .zip(rd.u0.iter())
        .map(|((&r, &w), &u)| w.sqrt() * r * p.eval_unchecked(r).sqrt() * u)
        .sum();
    let a = integral * integral;
    if !(a > 0.0) {
        return Err(Error::Consistency(format!(
            "slope coefficient a = {a} must be strictly positive"
        )));
    }
    Ok(a)
}

/// One sampled point of the dominant-eigenvalue curve.
#[derive(Debug, Clone, Copy)]
pub struct MuSample {
    pub k: f64,
    pub mu: f64,
    pub gap: f64,
}

/// Sampled `mu(k)` with a linear fit over the window `k in [1e-3, 1e-2]`.
#[derive(Debug, Clone)]
pub struct MuCurve {
    pub samples: Vec<MuSample>,
    pub slope: f64,
    pub intercept: f64,
    /// root-mean-square residual of the fit
    pub fit_rms: f64,
}

/// Fit window for the slope of `mu(k)`.
pub const MU_FIT_WINDOW: (f64, f64) = (1e-3, 1e-2);

/// Samples the dominant eigenvalue of `L(k)` at threshold coupling over
/// `k_samples` and fits the near-zero linear law.
pub fn mu_curve(
    p: &PairPotential,
    rd: &ResonanceData,
    k_samples: &[f64],
    grid: &BsGrid,
) -> Result<MuCurve> {
    if k_samples.is_empty() {
        return Err(Error::Domain("need at least one k sample".into()));
    }
    for &k in k_samples {
        if !(k > 0.0 && k < rd.rho0_est) {
            return Err(Error::Range(format!(
                "k sample {k:.3e} outside (0, rho0_est = {:.3e})",
                rd.rho0_est
            )));
        }
    }
    let samples: Vec<MuSample> = k_samples
        .iter()
        .map(|&k| {
            let m = build_bs_matrix(p, k, &grid.fine)?;
            let (m1, m2, _) = top_two_eigenvalues(&m.matrix, 1e-13);
            Ok(MuSample {
                k,
                mu: m1,
                gap: m1 - m2,
            })
        })
        .collect::<Result<_>>()?;

    let in_window: Vec<&MuSample> = samples
        .iter()
        .filter(|s| {
            s.k >= MU_FIT_WINDOW.0 * (1.0 - 1e-12) && s.k <= MU_FIT_WINDOW.1 * (1.0 + 1e-12)
        })
        .collect();
    if in_window.len() < 2 {
        return Err(Error::Range(format!(
            "need at least 2 samples inside the fit window [{}, {}], got {}",
            MU_FIT_WINDOW.0,
            MU_FIT_WINDOW.1,
            in_window.len()
        )));
    }
    let n = in_window.len() as f64;
    let sx: f64 = in_window.iter().map(|s| s.k).sum();
    let sy: f64 = in_window.iter().map(|s| s.mu).sum();
    let sxx: f64 = in_window.iter().map(|s| s.k * s.k).sum();
    let sxy: f64 = in_window.iter().map(|s| s.k * s.mu).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let fit_rms = (in_window
        .iter()
        .map(|s| (s.mu - intercept - slope * s.k).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(MuCurve {
        samples,
        slope,
        intercept,
        fit_rms,
    })
}

/// One row of the pole-decomposition study of W(k).
#[derive(Debug, Clone, Copy)]
pub struct WSample {
    pub k: f64,
    pub norm_w: f64,
    pub norm_z: f64,
    /// `|W(k)| * a * k`, which tends to 1 as k -> 0
    pub w_ak: f64,
}

/// Decomposition `W(k) = P0/(a k) + Z(k)` sampled over momenta.
#[derive(Debug, Clone)]
pub struct WDecomposition {
    pub rows: Vec<WSample>,
    pub a: f64,
}

/// Forms `W(k) = (1 - L(k))^{-1}` at threshold coupling through the spectral
/// decomposition of `L(k)`, subtracts the pole term `P0 / (a k)`, and records
/// the spectral norms of both pieces.
pub fn w_decomposition(
    p: &PairPotential,
    rd: &ResonanceData,
    k_samples: &[f64],
    grid: &BsGrid,
) -> Result<WDecomposition> {
    for &k in k_samples {
        if !(k > 0.0 && k < rd.rho0_est) {
            return Err(Error::Range(format!(
                "k sample {k:.3e} outside (0, rho0_est = {:.3e})",
                rd.rho0_est
            )));
        }
    }
    let n = grid.n_fine();
    let p0 = &rd.u0 * rd.u0.transpose();
    let mut rows = Vec::with_capacity(k_samples.len());
    for &k in k_samples {
        let m = build_bs_matrix(p, k, &grid.fine)?;
        let sol = sym_eig_top(&m.matrix, n, 1e-9)?;
        let mut norm_w = 0.0f64;
        for &mu in &sol.values {
            let d = 1.0 - mu;
            if d.abs() < 1e-13 {
                return Err(Error::Singular {
                    msg: format!("1 - L(k) numerically singular at k = {k:.3e}"),
                    k_min: k,
                });
            }
            norm_w = norm_w.max((1.0 / d).abs());
        }
        // W = V diag(1/(1-mu)) V^T
        let mut w = DMatrix::zeros(n, n);
        for (idx, &mu) in sol.values.iter().enumerate() {
            let v = sol.vectors.column(idx);
            w += v * v.transpose() / (1.0 - mu);
        }
        let z = &w - &p0 / (rd.a * k);
        let zsol = sym_eig_top(&z, n, 1e-9)?;
        let norm_z = zsol.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        rows.push(WSample {
            k,
            norm_w,
            norm_z,
            w_ak: norm_w * rd.a * k,
        });
    }
    Ok(WDecomposition { rows, a: rd.a })
}

/// A bound state found below threshold.
#[derive(Debug, Clone, Copy)]
pub struct BindingResult {
    /// energy `E = -kappa^2 < 0`
    pub energy: f64,
    pub kappa: f64,
    pub kappa_shooting: f64,
    /// relative disagreement of the two routes
    pub cross_check_rel: f64,
}

/// Binding energy of the potential as passed (coupling included): the root of
/// `mu_max(L(kappa)) = 1`, cross-checked by Numerov shooting. Returns `None`
/// when the coupling is at or below threshold.
pub fn binding_energy(p: &PairPotential, grid: &BsGrid) -> Result<Option<BindingResult>> {
    let eng = Engine::new(p, grid);
    let mu0 = eng.mu_extrapolated(0.0)?;
    if mu0 <= 1.0 + 1e-8 {
        // at (or below) threshold within grid resolution: no bound state
        return Ok(None);
    }
    // bracket the root of mu(kappa) = 1
    let mut hi = 1e-3;
    let mut mu_hi = eng.mu_extrapolated(hi)?;
    while mu_hi > 1.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Convergence(
                "could not bracket the binding momentum".into(),
            ));
        }
        mu_hi = eng.mu_extrapolated(hi)?;
    }
    let lo = if hi <= 2e-3 { 0.0 } else { hi / 2.0 };
    let kappa = brent_root(
        |k| eng.mu_extrapolated(k).map(|m| m - 1.0).unwrap_or(f64::NAN),
        lo,
        hi,
        1e-13 * hi.max(1e-3),
    )?;

    // Numerov oracle. A compactly supported well is integrated only over its
    // interior and matched to the exact exterior log-derivative -kappa at the
    // edge; potentials with tails are matched from both sides at an interior
    // point, which keeps the growing tail mode out of the sweep.
    let mismatch: Box<dyn Fn(f64) -> f64> = match p.shape {
        Shape::SquareWell => {
            let steps = shooting_steps(p, p.range, kappa);
            Box::new(move |kap: f64| {
                match numerov_outward(&|r| p.eval_unchecked(r), -kap * kap, p.range, steps) {
                    Ok(sol) => sol.log_derivative + kap,
                    Err(_) => f64::NAN,
                }
            })
        }
        _ => {
            let r_match = (4.0 * p.range).min(0.5 * grid.r_max);
            let r_far = grid.r_max;
            let steps_out = shooting_steps(p, r_match, kappa);
            let steps_in = shooting_steps(p, r_far - r_match, kappa).max(40_000);
            Box::new(move |kap: f64| {
                let out =
                    match numerov_outward(&|r| p.eval_unchecked(r), -kap * kap, r_match, steps_out)
                    {
                        Ok(sol) => sol.log_derivative,
                        Err(_) => return f64::NAN,
                    };
                let inw = match numerov_inward_log_derivative(
                    &|r| p.eval_unchecked(r),
                    kap,
                    r_match,
                    r_far,
                    steps_in,
                ) {
                    Ok(ld) => ld,
                    Err(_) => return f64::NAN,
                };
                out - inw
            })
        }
    };
    // bracket tightly around the BS estimate: far from the root the matching
    // function develops poles where the outward solution grows a node
    let (mut slo, mut shi) = (0.9 * kappa, 1.1 * kappa);
    for _ in 0..8 {
        if mismatch(slo) * mismatch(shi) < 0.0 {
            break;
        }
        slo *= 0.8;
        shi *= 1.25;
    }
    if mismatch(slo) * mismatch(shi) > 0.0 {
        return Err(Error::Bracketing { lo: slo, hi: shi });
    }
    let kappa_shooting = brent_root(&*mismatch, slo, shi, 1e-14 * kappa.max(1e-6))?;

    // tail truncation at r_max limits the achievable agreement for potentials
    // with tails; widen the tolerance accordingly
    let tail = p.eval_unchecked(grid.r_max);
    let tol_rel = (1e-6 + 10.0 * tail / (2.0 * kappa * kappa).max(1e-300)).min(1e-2);
    let rel = (kappa - kappa_shooting).abs() / kappa;
    if rel > tol_rel * 10.0 {
        return Err(Error::Consistency(format!(
            "BS binding momentum {kappa:.10e} and shooting {kappa_shooting:.10e} \
             disagree by {rel:.3e}"
        )));
    }
    Ok(Some(BindingResult {
        energy: -kappa * kappa,
        kappa,
        kappa_shooting,
        cross_check_rel: rel,
    }))
}
