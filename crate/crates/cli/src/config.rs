//! Experiment configuration: a TOML file with one block per subsystem.
//! Unknown keys are rejected; every numeric field is range-checked before
//! any computation starts.

use anyhow::{bail, Context};
use serde::Deserialize;

use fewbody_core::bounds::RadialProfile;
use fewbody_core::model::{MassConfig, PairPotential, PairPotentials, Shape};
use fewbody_core::threebody::BasisRecipe;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub masses: Option<MassesBlock>,
    pub potentials: Option<PotentialsBlock>,
    pub twobody: Option<TwoBodyBlock>,
    pub threebody: Option<ThreeBodyBlock>,
    pub bounds: Option<BoundsBlock>,
    pub output: Option<OutputBlock>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassesBlock {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsBlock {
    pub p12: PotentialSpec,
    pub p13: PotentialSpec,
    pub p23: PotentialSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub shape: String,
    pub depth: f64,
    pub range: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoBodyBlock {
    #[serde(default = "default_n_nodes")]
    pub n_nodes: usize,
    /// momentum samples for the mu-curve experiment
    #[serde(default = "default_k_samples")]
    pub k_samples: GridSpec,
    /// momentum samples for the W/Z decomposition
    #[serde(default = "default_wk_samples")]
    pub wk_samples: Vec<f64>,
}

fn default_n_nodes() -> usize {
    400
}

fn default_k_samples() -> GridSpec {
    GridSpec {
        min: 1e-3,
        max: 1e-2,
        count: 12,
        spacing: "log".into(),
    }
}

fn default_wk_samples() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub spacing: String,
}

fn default_spacing() -> String {
    "linear".into()
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| {
                let t = i as f64 / (self.count - 1) as f64;
                if self.spacing == "log" {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + (self.max - self.min) * t
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeBodyBlock {
    /// Theta grid as fractions of the computed Theta_cr
    #[serde(default = "default_theta_grid")]
    pub theta_grid_frac: GridSpec,
    /// Lambda as a fraction of the computed Lambda_cr
    #[serde(default = "default_lambda_frac")]
    pub lambda_frac: f64,
    /// radii for the I_R spreading metric
    #[serde(default = "default_r_list")]
    pub r_list: Vec<f64>,
    #[serde(default = "default_tol_bind")]
    pub tol_bind: f64,
    /// geometric ladders (lo, hi, rungs) for dimer, halo, and core widths
    pub basis: Option<BasisBlock>,
    /// number of points in the spreading approach sequence
    #[serde(default = "default_spreading_points")]
    pub spreading_points: usize,
    /// probe fractions for the empirical positivity box
    #[serde(default = "default_epsilon_probes")]
    pub epsilon_probe_fracs: Vec<f64>,
}

fn default_theta_grid() -> GridSpec {
    GridSpec {
        min: 0.3,
        max: 1.0,
        count: 11,
        spacing: "linear".into(),
    }
}

fn default_lambda_frac() -> f64 {
    0.3
}

fn default_r_list() -> Vec<f64> {
    vec![5.0]
}

fn default_tol_bind() -> f64 {
    1e-6
}

fn default_spreading_points() -> usize {
    6
}

fn default_epsilon_probes() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    pub dimer: (f64, f64, usize),
    pub halo: (f64, f64, usize),
    pub core: (f64, f64, usize),
}

impl BasisBlock {
    pub fn recipe(&self) -> BasisRecipe {
        BasisRecipe {
            dimer: self.dimer,
            halo: self.halo,
            core: self.core,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsBlock {
    pub profile: Option<ProfileSpec>,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_z_samples")]
    pub z_samples: GridSpec,
    #[serde(default = "default_xi_grid")]
    pub xi_grid: GridSpec,
    #[serde(default = "default_zabyv_r0")]
    pub zabyv_r0: Vec<f64>,
    #[serde(default = "default_zabyv_delta")]
    pub zabyv_delta: Vec<f64>,
    #[serde(default = "default_zabyv_samples")]
    pub zabyv_samples: usize,
}

fn default_eps0() -> f64 {
    1.0
}

fn default_z_samples() -> GridSpec {
    GridSpec {
        min: 1e-5,
        max: 1e-1,
        count: 11,
        spacing: "log".into(),
    }
}

fn default_xi_grid() -> GridSpec {
    GridSpec {
        min: 0.1,
        max: 20.0,
        count: 200,
        spacing: "log".into(),
    }
}

fn default_zabyv_r0() -> Vec<f64> {
    vec![0.3, 0.7, 1.0, 2.5, 8.0]
}

fn default_zabyv_delta() -> Vec<f64> {
    vec![0.05, 0.2, 0.5, 1.0, 3.0]
}

fn default_zabyv_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: String,
    pub amplitude: f64,
    /// width for gaussian/exponential, radius for truncated
    pub width: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<String>,
}

/// The experiments the runner knows about.
pub const EXPERIMENTS: [&str; 8] = [
    "twobody-threshold",
    "mu-curve",
    "wk-decomp",
    "lemma3",
    "green-bound",
    "zabyv",
    "threebody-scan",
    "spreading",
];

/// Blocks each experiment needs, by name.
pub fn required_blocks(experiment: &str) -> &'static [&'static str] {
    match experiment {
        "twobody-threshold" | "mu-curve" | "wk-decomp" => &["masses", "potentials", "twobody"],
        "lemma3" | "green-bound" | "zabyv" => &["bounds"],
        "threebody-scan" | "spreading" => &["masses", "potentials", "twobody", "threebody"],
        _ => &[],
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).context("config parse error")
    }

    pub fn has_block(&self, name: &str) -> bool {
        match name {
            "masses" => self.masses.is_some(),
            "potentials" => self.potentials.is_some(),
            "twobody" => self.twobody.is_some(),
            "threebody" => self.threebody.is_some(),
            "bounds" => self.bounds.is_some(),
            "output" => self.output.is_some(),
            _ => false,
        }
    }

    /// Full validation report: range errors and warnings, no computation.
    pub fn validation_report(&self) -> (Vec<String>, Vec<String>) {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        if let Some(m) = &self.masses {
            for (n, v) in [("m1", m.m1), ("m2", m.m2), ("m3", m.m3)] {
                if !(v > 0.0 && v.is_finite()) {
                    errors.push(format!("masses.{n} = {v} must be positive and finite"));
                }
            }
        }
        if let Some(p) = &self.potentials {
            for (n, s) in [("p12", &p.p12), ("p13", &p.p13), ("p23", &p.p23)] {
                if !matches!(s.shape.as_str(), "gaussian" | "exponential" | "square-well") {
                    errors.push(format!(
                        "potentials.{n}.shape = {:?} is not one of gaussian | exponential | square-well",
                        s.shape
                    ));
                }
                if !(s.depth >= 0.0 && s.depth.is_finite()) {
                    errors.push(format!("potentials.{n}.depth = {} must be >= 0", s.depth));
                }
                if !(s.range > 0.0 && s.range.is_finite()) {
                    errors.push(format!("potentials.{n}.range = {} must be > 0", s.range));
                }
            }
        }
        if let Some(t) = &self.twobody {
            if t.n_nodes < 40 || t.n_nodes > 5000 {
                errors.push(format!(
                    "twobody.n_nodes = {} outside the supported range [40, 5000]",
                    t.n_nodes
                ));
            }
            if !(t.k_samples.min > 0.0 && t.k_samples.max > t.k_samples.min) {
                errors.push("twobody.k_samples must satisfy 0 < min < max".into());
            }
            if t.wk_samples.iter().any(|&k| k <= 0.0) {
                errors.push("twobody.wk_samples must all be positive".into());
            }
        }
        if let Some(t) = &self.threebody {
            if !(t.theta_grid_frac.min >= 0.0 && t.theta_grid_frac.max > t.theta_grid_frac.min) {
                errors.push("threebody.theta_grid_frac must satisfy 0 <= min < max".into());
            }
            if t.theta_grid_frac.max > 1.5 {
                warnings.push(format!(
                    "threebody.theta_grid_frac.max = {} puts the grid outside [0, 1.5 * Theta_cr]",
                    t.theta_grid_frac.max
                ));
            }
            if t.theta_grid_frac.count < 2 {
                errors.push("threebody.theta_grid_frac.count must be >= 2".into());
            }
            if !(t.lambda_frac > 0.0 && t.lambda_frac < 1.0) {
                errors.push(format!(
                    "threebody.lambda_frac = {} must lie in (0, 1) to keep the essential spectrum at zero",
                    t.lambda_frac
                ));
            }
            if t.r_list.is_empty() || t.r_list.iter().any(|&r| r <= 0.0) {
                errors.push("threebody.r_list must be non-empty with positive radii".into());
            }
            if !(t.tol_bind > 0.0 && t.tol_bind < 1.0) {
                errors.push(format!("threebody.tol_bind = {} out of range", t.tol_bind));
            }
            if t.spreading_points < 2 || t.spreading_points > 40 {
                errors.push("threebody.spreading_points must be in [2, 40]".into());
            }
            if let Some(b) = &t.basis {
                if b.recipe().validate().is_err() {
                    errors
                        .push("threebody.basis ladders must have positive bounds and rungs".into());
                }
            }
            for &f in &t.epsilon_probe_fracs {
                if !(f > 0.0 && f < 1.0) {
                    errors.push(format!(
                        "threebody.epsilon_probe_fracs entry {f} not in (0, 1)"
                    ));
                }
            }
        }
        if let Some(b) = &self.bounds {
            if let Some(p) = &b.profile {
                if !matches!(p.kind.as_str(), "gaussian" | "exponential" | "truncated") {
                    errors.push(format!(
                        "bounds.profile.kind = {:?} is not one of gaussian | exponential | truncated",
                        p.kind
                    ));
                }
                if !(p.amplitude > 0.0 && p.width > 0.0) {
                    errors.push("bounds.profile amplitude and width must be positive".into());
                }
            }
            if !(b.eps0 > 0.0) {
                errors.push(format!("bounds.eps0 = {} must be > 0", b.eps0));
            }
            if !(b.z_samples.min > 0.0 && b.z_samples.max > b.z_samples.min) {
                errors.push("bounds.z_samples must satisfy 0 < min < max".into());
            }
            if b.z_samples.count < 3 {
                errors.push("bounds.z_samples.count must be >= 3".into());
            }
            if !(b.xi_grid.min > 0.0 && b.xi_grid.max > b.xi_grid.min) {
                errors.push("bounds.xi_grid must satisfy 0 < min < max".into());
            }
            if b.zabyv_r0.iter().any(|&v| v <= 0.0) || b.zabyv_delta.iter().any(|&v| v <= 0.0) {
                errors.push("bounds.zabyv_r0 and bounds.zabyv_delta must be positive".into());
            }
            if b.zabyv_samples == 0 {
                errors.push("bounds.zabyv_samples must be >= 1".into());
            }
        }
        (errors, warnings)
    }

    pub fn masses_config(&self) -> anyhow::Result<MassConfig> {
        let m = self.masses.as_ref().context("missing [masses] block")?;
        Ok(MassConfig::new(m.m1, m.m2, m.m3)?)
    }

    pub fn pair_potentials(&self) -> anyhow::Result<PairPotentials> {
        let p = self
            .potentials
            .as_ref()
            .context("missing [potentials] block")?;
        Ok(PairPotentials {
            v12: build_potential(&p.p12)?,
            v13: build_potential(&p.p13)?,
            v23: build_potential(&p.p23)?,
        })
    }

    pub fn bounds_profile(&self) -> anyhow::Result<RadialProfile> {
        let b = self.bounds.as_ref().context("missing [bounds] block")?;
        let spec = b.profile.clone().unwrap_or(ProfileSpec {
            kind: "gaussian".into(),
            amplitude: 1.0,
            width: 1.0,
        });
        Ok(match spec.kind.as_str() {
            "gaussian" => RadialProfile::Gaussian {
                amplitude: spec.amplitude,
                width: spec.width,
            },
            "exponential" => RadialProfile::Exponential {
                amplitude: spec.amplitude,
                width: spec.width,
            },
            "truncated" => RadialProfile::Truncated {
                amplitude: spec.amplitude,
                radius: spec.width,
            },
            other => bail!("unknown profile kind {other:?}"),
        })
    }
}

pub fn build_potential(spec: &PotentialSpec) -> anyhow::Result<PairPotential> {
    let shape = match spec.shape.as_str() {
        "gaussian" => Shape::Gaussian,
        "exponential" => Shape::Exponential,
        "square-well" => Shape::SquareWell,
        other => bail!("unknown potential shape {other:?}"),
    };
    Ok(PairPotential::new(shape, spec.depth, spec.range, 1.0)?)
}
