//! Experiment drivers. Every driver computes first and only then emits its
//! artifacts, so a failed run leaves nothing behind; all CSV content is
//! formatted deterministically.

use anyhow::{bail, Context};

use fewbody_core::bounds::{
    divergence_report, green6d, green6d_bound, heat_identity_integral, zabyv_check,
};
use fewbody_core::model::{pair_coefficients, Pair, PairPotential};
use fewbody_core::numerics::top_two_eigenvalues;
use fewbody_core::threebody::{
    empirical_epsilon, spreading_metric, theta_scan, two_body_subthresholds, xi2_moment,
    BasisRecipe, GaussianBasis, ScanContext, ThreeBodyPotentials,
};
use fewbody_core::twobody::{
    build_bs_matrix, coupling_threshold, mu_curve, resonance_function, w_decomposition, BsGrid,
};

use crate::config::ExperimentConfig;

/// Files produced by one run: (name, content).
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    /// basis cache artifact to persist under the cache directory, if any
    pub cache: Option<(String, String)>,
}

impl RunOutput {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            cache: None,
        }
    }

    fn push(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }
}

/// Deterministic float formatting for all CSV output.
pub fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

struct TwoBodyLab {
    q12: PairPotential,
    grid: BsGrid,
}

fn twobody_lab(cfg: &ExperimentConfig) -> anyhow::Result<TwoBodyLab> {
    let masses = cfg.masses_config()?;
    let pots = cfg.pair_potentials()?;
    let tb = cfg.twobody.as_ref().context("missing [twobody] block")?;
    let q12 = pots.scaled_for_pair(Pair::P12, &masses)?;
    if q12.is_zero() {
        bail!(fewbody_core::Error::Domain(
            "pair-12 potential is identically zero".into()
        ));
    }
    let grid = BsGrid::for_potential(&q12, tb.n_nodes)?;
    Ok(TwoBodyLab { q12, grid })
}

pub fn run_twobody_threshold(cfg: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    let masses = cfg.masses_config()?;
    let pots = cfg.pair_potentials()?;
    let tb = cfg.twobody.as_ref().context("missing [twobody] block")?;
    let mut rows = Vec::new();
    for (name, pair) in [("p12", Pair::P12), ("p13", Pair::P13), ("p23", Pair::P23)] {
        let q = pots.scaled_for_pair(pair, &masses)?;
        let grid = BsGrid::for_potential(&q, tb.n_nodes)?;
        let thr = coupling_threshold(&q, &grid)?;
        rows.push(format!(
            "{name},{:?},{},{},{},{},{},{}",
            pots.get(pair).shape,
            fmt(thr.lambda_cr),
            fmt(thr.lambda_cr_grid),
            fmt(thr.lambda_cr_shooting),
            fmt(thr.mu_max),
            fmt(thr.cross_check_rel),
            grid.n_fine(),
        ));
    }
    let mut out = RunOutput::new();
    out.push(
        "threshold.csv",
        format!(
            "pair,shape,lambda_cr,lambda_cr_grid,lambda_cr_shooting,mu_max,cross_check_rel,n_nodes\n{}\n",
            rows.join("\n")
        ),
    );
    Ok(out)
}

pub fn run_mu_curve(cfg: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    let lab = twobody_lab(cfg)?;
    let tb = cfg.twobody.as_ref().unwrap();
    let thr = coupling_threshold(&lab.q12, &lab.grid)?;
    let tuned = lab.q12.with_lambda(thr.lambda_cr_grid)?;
    let rd = resonance_function(&tuned, &lab.grid)?;
    let ks = tb.k_samples.points();
    let mc = mu_curve(&tuned, &rd, &ks, &lab.grid)?;
    let mut out = RunOutput::new();
    let mut csv = String::from("k,mu,gap\n");
    for s in &mc.samples {
        csv.push_str(&format!("{},{},{}\n", fmt(s.k), fmt(s.mu), fmt(s.gap)));
    }
    out.push("mu_curve.csv", csv);
    out.push(
        "mu_fit.csv",
        format!(
            "slope,intercept,fit_rms,a_coefficient,rho0_est,lambda_cr,lambda_cr_grid\n{},{},{},{},{},{},{}\n",
            fmt(mc.slope),
            fmt(mc.intercept),
            fmt(mc.fit_rms),
            fmt(rd.a),
            fmt(rd.rho0_est),
            fmt(thr.lambda_cr),
            fmt(thr.lambda_cr_grid),
        ),
    );
    Ok(out)
}

pub fn run_wk_decomp(cfg: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    let lab = twobody_lab(cfg)?;
    let tb = cfg.twobody.as_ref().unwrap();
    let thr = coupling_threshold(&lab.q12, &lab.grid)?;
    let tuned = lab.q12.with_lambda(thr.lambda_cr_grid)?;
    let rd = resonance_function(&tuned, &lab.grid)?;
    let wd = w_decomposition(&tuned, &rd, &tb.wk_samples, &lab.grid)?;
    let mut csv = String::from("k,mu,gap,norm_w,norm_z\n");
    for row in &wd.rows {
        let m = build_bs_matrix(&tuned, row.k, &lab.grid.fine)?;
        let (m1, m2, _) = top_two_eigenvalues(&m.matrix, 1e-13);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(row.k),
            fmt(m1),
            fmt(m1 - m2),
            fmt(row.norm_w),
            fmt(row.norm_z)
        ));
    }
    let mut out = RunOutput::new();
    out.push("wk.csv", csv);
    out.push(
        "wk_summary.csv",
        format!(
            "a_coefficient,rho0_est,smallest_w_ak,max_norm_z,norm_z_at_largest_k\n{},{},{},{},{}\n",
            fmt(wd.a),
            fmt(rd.rho0_est),
            fmt(wd.rows.iter().map(|r| r.w_ak).fold(f64::INFINITY, f64::min)),
            fmt(wd.rows.iter().map(|r| r.norm_z).fold(0.0, f64::max)),
            fmt(wd.rows.first().map(|r| r.norm_z).unwrap_or(f64::NAN)),
        ),
    );
    Ok(out)
}

pub fn run_lemma3(cfg: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    let b = cfg.bounds.as_ref().context("missing [bounds] block")?;
    let g = cfg.bounds_profile()?;
    let zs = b.z_samples.points();
    let rep = divergence_report(&g, b.eps0, &zs)?;
    let mut csv = String::from("z,j,lower_bound\n");
    for row in &rep.rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt(row.z),
            fmt(row.j),
            fmt(row.lower_bound)
        ));
    }
    let mut out = RunOutput::new();
    out.push("lemma3.csv", csv);
    out.push(
        "lemma3_fit.csv",
        format!(
            "slope,slope_expected,r_squared,fit_rms,eps_reduced,bound_margin\n{},{},{},{},{},{}\n",
            fmt(rep.slope),
            fmt(rep.slope_expected),
            fmt(rep.r_squared),
            fmt(rep.fit_rms),
            fmt(rep.eps_reduced),
            fmt(rep.bound_margin),
        ),
    );
    Ok(out)
}

pub fn run_green_bound(cfg: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    let b = cfg.bounds.as_ref().context("missing [bounds] block")?;
    let identity = heat_identity_integral(1e-10)?;
    let xis = b.xi_grid.points();
    let mut csv = String::from("xi,g0,bound\n");
    let mut violations = 0usize;
    for &xi in &xis {
        let g = green6d(xi)?;
        let bound = green6d_bound(xi);
        if g > bound {
            violations += 1;
        }
        csv.push_str(&format!("{},{},{}\n", fmt(xi), fmt(g), fmt(bound)));
    }
    let mut out = RunOutput::new();
    out.push("green.csv", csv);
    out.push(
        "green_summary.csv",
        format!(
            "heat_identity,identity_rel_err,samples,violations\n{},{},{},{}\n",
            fmt(identity),
            fmt((identity - 256.0 / 9.0).abs() / (256.0 / 9.0)),
            xis.len(),
            violations
        ),
    );
    Ok(out)
}

pub fn run_zabyv(cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<RunOutput> {
    let b = cfg.bounds.as_ref().context("missing [bounds] block")?;
    let mut csv = String::from("r0,delta,samples,min_ratio,all_pass\n");
    for (i, &r0) in b.zabyv_r0.iter().enumerate() {
        for (j, &delta) in b.zabyv_delta.iter().enumerate() {
            let rep = zabyv_check(r0, delta, b.zabyv_samples, seed ^ ((i * 31 + j) as u64))?;
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt(r0),
                fmt(delta),
                rep.samples,
                fmt(rep.min_ratio),
                rep.all_pass
            ));
        }
    }
    let mut out = RunOutput::new();
    out.push("zabyv.csv", csv);
    Ok(out)
}

/// Everything the three-body experiments share: thresholds, the tuned pair-12
/// potential, and the generated (or cached) basis.
struct ThreeBodyLab {
    ctx: ScanContext,
    theta_cr: f64,
    lambda_cr: f64,
    recipe: BasisRecipe,
}

fn threebody_lab(
    cfg: &ExperimentConfig,
    cached_forms: Option<String>,
) -> anyhow::Result<ThreeBodyLab> {
    let masses = cfg.masses_config()?;
    let pots = cfg.pair_potentials()?;
    let tb2 = cfg.twobody.as_ref().context("missing [twobody] block")?;
    let tb3 = cfg
        .threebody
        .as_ref()
        .context("missing [threebody] block")?;
    let frame = pair_coefficients(&masses);
    let sub = two_body_subthresholds(&masses, &pots, tb2.n_nodes)?;
    let q12 = pots.scaled_for_pair(Pair::P12, &masses)?;
    let grid12 = BsGrid::for_potential(&q12, tb2.n_nodes)?;
    let lam12 = coupling_threshold(&q12, &grid12)?.lambda_cr;
    let potentials = ThreeBodyPotentials {
        v12: pots.v12.with_lambda(lam12)?,
        v13: pots.v13,
        v23: pots.v23,
    };
    let recipe = tb3.basis.as_ref().map(|b| b.recipe()).unwrap_or_default();
    let ctx = match cached_forms.and_then(|text| GaussianBasis::from_cache_text(&text, &recipe)) {
        Some(basis) => ScanContext {
            frame,
            potentials,
            basis,
        },
        None => ScanContext::new(frame, potentials, &recipe)?,
    };
    Ok(ThreeBodyLab {
        ctx,
        theta_cr: sub.theta_cr,
        lambda_cr: sub.lambda_cr,
        recipe,
    })
}

fn scan_csv_header(r_list: &[f64]) -> String {
    let mut header = String::from("theta,lambda,e_gr");
    for &r in r_list {
        header.push_str(&format!(",i_r_{r}"));
    }
    header.push_str(",xi2_moment,basis_n,kept,cond_s\n");
    header
}

pub fn run_threebody_scan(
    cfg: &ExperimentConfig,
    cached_forms: Option<String>,
) -> anyhow::Result<RunOutput> {
    let tb3 = cfg
        .threebody
        .as_ref()
        .context("missing [threebody] block")?;
    let lab = threebody_lab(cfg, cached_forms)?;
    let lambda = tb3.lambda_frac * lab.lambda_cr;
    let thetas: Vec<f64> = tb3
        .theta_grid_frac
        .points()
        .iter()
        .map(|f| f * lab.theta_cr)
        .collect();
    let scan = theta_scan(&lab.ctx, &thetas, lambda, &tb3.r_list, tb3.tol_bind)?;
    let mut csv = scan_csv_header(&tb3.r_list);
    for r in &scan.records {
        let irs: String = r.i_r.iter().map(|v| format!(",{}", fmt(*v))).collect();
        csv.push_str(&format!(
            "{},{},{}{},{},{},{},{}\n",
            fmt(r.theta),
            fmt(r.lambda),
            fmt(r.e_gr),
            irs,
            fmt(r.xi2_moment),
            r.basis_size,
            r.kept,
            fmt(r.overlap_condition)
        ));
    }
    let mut out = RunOutput::new();
    out.push("scan.csv", csv);
    out.push(
        "scan_summary.csv",
        format!(
            "theta_cr,lambda_cr,lambda,theta0,theta0_frac,tol_bind,basis_n\n{},{},{},{},{},{},{}\n",
            fmt(lab.theta_cr),
            fmt(lab.lambda_cr),
            fmt(lambda),
            fmt(scan.theta0),
            fmt(scan.theta0 / lab.theta_cr),
            fmt(tb3.tol_bind),
            lab.ctx.basis.len()
        ),
    );
    out.cache = Some((
        format!("basis-{}.tsv", lab.recipe.size()),
        lab.ctx.basis.to_cache_text(),
    ));
    Ok(out)
}

pub fn run_spreading(
    cfg: &ExperimentConfig,
    cached_forms: Option<String>,
) -> anyhow::Result<RunOutput> {
    let tb3 = cfg
        .threebody
        .as_ref()
        .context("missing [threebody] block")?;
    let lab = threebody_lab(cfg, cached_forms)?;
    let lambda = tb3.lambda_frac * lab.lambda_cr;
    let sub = fewbody_core::threebody::SubThresholds {
        theta_cr: lab.theta_cr,
        lambda_cr: lab.lambda_cr,
    };
    let eps = empirical_epsilon(&lab.ctx, &sub, &tb3.epsilon_probe_fracs, tb3.tol_bind)?;
    let thetas: Vec<f64> = tb3
        .theta_grid_frac
        .points()
        .iter()
        .map(|f| f * lab.theta_cr)
        .collect();
    let scan = theta_scan(&lab.ctx, &thetas, lambda, &tb3.r_list, tb3.tol_bind)?;
    let theta0 = scan.theta0;

    // approach sequence theta_j = theta0 + (theta_cr - theta0) 2^{-j}
    let mut csv = scan_csv_header(&tb3.r_list);
    let mut first_ir = None;
    let mut last_ir = None;
    for j in 0..tb3.spreading_points {
        let theta = theta0 + (lab.theta_cr - theta0) * 0.5f64.powi(j as i32);
        let vr = lab.ctx.solve(theta, lambda)?;
        let irs: Vec<f64> = tb3
            .r_list
            .iter()
            .map(|&r| spreading_metric(&vr, &lab.ctx.basis, r))
            .collect::<Result<_, _>>()?;
        let xi2 = xi2_moment(&vr, &lab.ctx.basis)?;
        if j == 0 {
            first_ir = irs.first().copied();
        }
        last_ir = irs.first().copied();
        let ir_cols: String = irs.iter().map(|v| format!(",{}", fmt(*v))).collect();
        csv.push_str(&format!(
            "{},{},{}{},{},{},{},{}\n",
            fmt(theta),
            fmt(lambda),
            fmt(vr.e_gr),
            ir_cols,
            fmt(xi2),
            vr.basis_size,
            vr.kept,
            fmt(vr.overlap_condition)
        ));
    }
    let mut out = RunOutput::new();
    out.push("spreading.csv", csv);
    out.push(
        "spreading_summary.csv",
        format!(
            "theta_cr,lambda_cr,lambda,epsilon_emp,theta0,i_r_first,i_r_last,i_r_ratio\n{},{},{},{},{},{},{},{}\n",
            fmt(lab.theta_cr),
            fmt(lab.lambda_cr),
            fmt(lambda),
            fmt(eps),
            fmt(theta0),
            fmt(first_ir.unwrap_or(f64::NAN)),
            fmt(last_ir.unwrap_or(f64::NAN)),
            fmt(last_ir.unwrap_or(f64::NAN) / first_ir.unwrap_or(f64::NAN)),
        ),
    );
    out.cache = Some((
        format!("basis-{}.tsv", lab.recipe.size()),
        lab.ctx.basis.to_cache_text(),
    ));
    Ok(out)
}
