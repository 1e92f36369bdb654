//! Correlated-Gaussian trial space at zero total angular momentum.
//!
//! Each basis function is `exp(-1/2 xi^T (A (x) I_3) xi)` with a 2x2 SPD form
//! `A` acting on the Jacobi labels. The recipe builds three two-cluster
//! channels (a dimer ladder along each pair's own separation axis crossed
//! with a halo ladder along its spectator axis) plus a fully correlated core
//! block of pairwise-width combinations.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::model::{JacobiFrame, Pair};

/// Geometric ladder of `n` widths between `lo` and `hi`.
fn geom_ladder(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Generation recipe: geometric width ladders per role.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRecipe {
    /// dimer-axis widths for the two-cluster channels
    pub dimer: (f64, f64, usize),
    /// halo-axis widths for the two-cluster channels
    pub halo: (f64, f64, usize),
    /// widths of the fully correlated core block (one ladder per pair)
    pub core: (f64, f64, usize),
}

impl Default for BasisRecipe {
    fn default() -> Self {
        Self {
            dimer: (0.35, 8.0, 5),
            halo: (1.0, 2000.0, 8),
            core: (0.35, 30.0, 4),
        }
    }
}

impl BasisRecipe {
    /// Total number of generated forms: three channels of `dimer x halo`
    /// plus the `core^3` block.
    pub fn size(&self) -> usize {
        3 * self.dimer.2 * self.halo.2 + self.core.2.pow(3)
    }

    /// A recipe with roughly twice as many functions, refining every ladder;
    /// used for the basis-doubling stability checks.
    pub fn doubled(&self) -> Self {
        Self {
            dimer: (self.dimer.0, self.dimer.1, self.dimer.2 + 2),
            halo: (self.halo.0, self.halo.1, self.halo.2 + 3),
            core: (self.core.0, self.core.1, self.core.2 + 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi, n)) in [
            ("dimer", self.dimer),
            ("halo", self.halo),
            ("core", self.core),
        ] {
            if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Domain(format!(
                    "{name} ladder must satisfy 0 < lo <= hi, got ({lo}, {hi})"
                )));
            }
            if n == 0 {
                return Err(Error::Domain(format!("{name} ladder must have >= 1 rung")));
            }
        }
        Ok(())
    }
}

/// The generated trial space.
#[derive(Debug, Clone)]
pub struct GaussianBasis {
    pub forms: Vec<Matrix2<f64>>,
    pub recipe: BasisRecipe,
}

fn outer(v: Vector2<f64>) -> Matrix2<f64> {
    v * v.transpose()
}

impl GaussianBasis {
    /// Builds the trial space for the given Jacobi frame. Every generated
    /// form is verified SPD.
    pub fn generate(recipe: &BasisRecipe, frame: &JacobiFrame) -> Result<Self> {
        recipe.validate()?;
        let dimer = geom_ladder(recipe.dimer.0, recipe.dimer.1, recipe.dimer.2);
        let halo = geom_ladder(recipe.halo.0, recipe.halo.1, recipe.halo.2);
        let core = geom_ladder(recipe.core.0, recipe.core.1, recipe.core.2);
        let mut forms = Vec::with_capacity(recipe.size());
        for pair in Pair::ALL {
            let c = outer(frame.pair_axis(pair));
            let d = outer(frame.spectator_axis(pair));
            for &a in &dimer {
                for &b in &halo {
                    forms.push(c / (a * a) + d / (b * b));
                }
            }
        }
        let axes: Vec<Matrix2<f64>> = Pair::ALL
            .iter()
            .map(|&p| outer(frame.pair_axis(p)))
            .collect();
        for &d12 in &core {
            for &d13 in &core {
                for &d23 in &core {
                    forms.push(
                        axes[0] / (d12 * d12) + axes[1] / (d13 * d13) + axes[2] / (d23 * d23),
                    );
                }
            }
        }
        let basis = Self {
            forms,
            recipe: recipe.clone(),
        };
        basis.check_spd()?;
        Ok(basis)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Serializes the forms as one `a11 a12 a22` triple per line, for the
    /// experiment runner's cache artifact.
    pub fn to_cache_text(&self) -> String {
        let mut s = String::with_capacity(self.forms.len() * 64);
        for a in &self.forms {
            s.push_str(&format!(
                "{:.17e} {:.17e} {:.17e}\n",
                a[(0, 0)],
                a[(0, 1)],
                a[(1, 1)]
            ));
        }
        s
    }

    /// Rebuilds a basis from cache text; the form count must match the
    /// recipe or the cache is rejected.
    pub fn from_cache_text(text: &str, recipe: &BasisRecipe) -> Option<Self> {
        let mut forms = Vec::new();
        for line in text.lines() {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .ok()?;
            if v.len() != 3 {
                return None;
            }
            forms.push(Matrix2::new(v[0], v[1], v[1], v[2]));
        }
        if forms.len() != recipe.size() {
            return None;
        }
        let basis = Self {
            forms,
            recipe: recipe.clone(),
        };
        basis.check_spd().ok()?;
        Some(basis)
    }

    fn check_spd(&self) -> Result<()> {
        for (i, a) in self.forms.iter().enumerate() {
            let (l1, l2) = eigenvalues_2x2(a);
            if !(l1 > 0.0 && l2 > 0.0) {
                return Err(Error::Input(format!(
                    "basis form {i} is not SPD (eigenvalues {l1:.3e}, {l2:.3e})"
                )));
            }
        }
        Ok(())
    }
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn eigenvalues_2x2(a: &Matrix2<f64>) -> (f64, f64) {
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 - disc, tr / 2.0 + disc)
}
