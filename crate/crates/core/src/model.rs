//! Physical setup: masses, pair potentials, and mass-scaled Jacobi frames.
//!
//! Units: ħ = 1 throughout, and all coordinates are mass-scaled Jacobi
//! coordinates, so every kinetic operator is a plain Laplacian and the mass
//! dependence lives entirely in the potential arguments.

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// Index of an interacting pair in the three-body system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    P12,
    P13,
    P23,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P12, Pair::P13, Pair::P23];
}

/// Masses of the three particles together with every derived reduced mass.
///
/// `mu_ij = m_i m_j / (m_i + m_j)` are the pair reduced masses and
/// `cap_m_ij = (m_i + m_j) m_l / (m_1 + m_2 + m_3)` the pair-spectator ones.
/// `alpha = 1/sqrt(2 mu_12)` converts the scaled Jacobi coordinate x back to
/// the physical separation of pair 12.
#[derive(Debug, Clone, Copy)]
pub struct MassConfig {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub mu12: f64,
    pub mu13: f64,
    pub mu23: f64,
    pub cap_m12: f64,
    pub cap_m13: f64,
    pub cap_m23: f64,
    pub alpha: f64,
}

/// Builds the full mass configuration from the three particle masses.
pub fn reduced_masses(m1: f64, m2: f64, m3: f64) -> Result<MassConfig> {
    for (name, m) in [("m1", m1), ("m2", m2), ("m3", m3)] {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain(format!(
                "mass {name} must be positive and finite, got {m}"
            )));
        }
    }
    let total = m1 + m2 + m3;
    let mu = |a: f64, b: f64| a * b / (a + b);
    let mu12 = mu(m1, m2);
    Ok(MassConfig {
        m1,
        m2,
        m3,
        mu12,
        mu13: mu(m1, m3),
        mu23: mu(m2, m3),
        cap_m12: (m1 + m2) * m3 / total,
        cap_m13: (m1 + m3) * m2 / total,
        cap_m23: (m2 + m3) * m1 / total,
        alpha: 1.0 / (2.0 * mu12).sqrt(),
    })
}

impl MassConfig {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        reduced_masses(m1, m2, m3)
    }

    pub fn mu(&self, pair: Pair) -> f64 {
        match pair {
            Pair::P12 => self.mu12,
            Pair::P13 => self.mu13,
            Pair::P23 => self.mu23,
        }
    }
}

/// Radial shape of a pair potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Gaussian,
    Exponential,
    SquareWell,
}

/// Nonnegative radial pair potential `V(r) = lambda * depth * shape(r / range)`
/// carrying certified exponential-falloff witnesses `(b1, b2)` with
/// `V(r) <= b1 exp(-b2 r)` for all r >= 0.
#[derive(Debug, Clone, Copy)]
pub struct PairPotential {
    pub shape: Shape,
    pub depth: f64,
    pub range: f64,
    pub lambda: f64,
    pub b1: f64,
    pub b2: f64,
}

impl PairPotential {
    pub fn new(shape: Shape, depth: f64, range: f64, lambda: f64) -> Result<Self> {
        if !(depth.is_finite() && depth >= 0.0) {
            return Err(Error::Domain(format!("depth must be >= 0, got {depth}")));
        }
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::Domain(format!("range must be > 0, got {range}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Domain(format!("lambda must be >= 0, got {lambda}")));
        }
        let strength = lambda * depth;
        // Witness choices, all provable in closed form:
        //   gaussian:    V0 e^{-(r/R)^2} <= V0 e^{1/4} e^{-r/R}   (max of b2 r - r^2/R^2 at r = R/2)
        //   exponential: exact with b2 = 1/R
        //   square well: V0 <= V0 e^{10} e^{-10 r/R} on the support r <= R
        // The square-well b2 = 10/R keeps the Birman-Schwinger box r_max = 20/b2 = 2R tight.
        let (b1, b2) = match shape {
            Shape::Gaussian => (strength * (0.25f64).exp(), 1.0 / range),
            Shape::Exponential => (strength, 1.0 / range),
            Shape::SquareWell => (strength * (10.0f64).exp(), 10.0 / range),
        };
        let b1 = if b1 > 0.0 { b1 } else { 1.0 };
        Ok(Self {
            shape,
            depth,
            range,
            lambda,
            b1,
            b2,
        })
    }

    pub fn gaussian(depth: f64, range: f64) -> Result<Self> {
        Self::new(Shape::Gaussian, depth, range, 1.0)
    }

    pub fn exponential(depth: f64, range: f64) -> Result<Self> {
        Self::new(Shape::Exponential, depth, range, 1.0)
    }

    pub fn square_well(depth: f64, range: f64) -> Result<Self> {
        Self::new(Shape::SquareWell, depth, range, 1.0)
    }

    /// Same potential with the coupling multiplier replaced.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.shape, self.depth, self.range, lambda)
    }

    /// Potential with a rescaled argument, `r -> alpha r`, as needed when a
    /// pair separation is expressed through a mass-scaled Jacobi coordinate.
    /// All three shapes are closed under this map: only the range changes.
    pub fn scaled_argument(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
        }
        Self::new(self.shape, self.depth, self.range / alpha, self.lambda)
    }

    /// Potential value without the domain check; callers guarantee `r >= 0`.
    #[inline]
    pub fn eval_unchecked(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let s = r / self.range;
        let shape = match self.shape {
            Shape::Gaussian => (-s * s).exp(),
            Shape::Exponential => (-s).exp(),
            Shape::SquareWell => {
                if s <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        self.lambda * self.depth * shape
    }

    pub fn is_zero(&self) -> bool {
        self.lambda * self.depth == 0.0
    }

    /// Checks the falloff bound `V(r) <= b1 exp(-b2 r)` on a dense grid.
    pub fn falloff_bound_holds(&self, samples: usize, r_hi: f64) -> bool {
        (0..samples).all(|i| {
            let r = r_hi * i as f64 / (samples - 1).max(1) as f64;
            self.eval_unchecked(r) <= self.b1 * (-self.b2 * r).exp() * (1.0 + 1e-12)
        })
    }
}

/// Evaluates a pair potential at physical separation `r >= 0`.
pub fn evaluate_potential(p: &PairPotential, r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Domain(format!(
            "separation must be >= 0 and finite, got {r}"
        )));
    }
    Ok(p.eval_unchecked(r))
}

/// Mass-scaled Jacobi frame anchored on pair 12:
/// `x = sqrt(2 mu_12) (r2 - r1)`, `y = sqrt(2 M_12) (r3 - cm_12)`.
///
/// `coeff(pair)` gives the 2-vector `c` such that the physical separation of
/// that pair is `c_x x + c_y y`; the kinetic operator in this frame is exactly
/// `-Lap_x - Lap_y`.
#[derive(Debug, Clone, Copy)]
pub struct JacobiFrame {
    pub masses: MassConfig,
    c12: Vector2<f64>,
    c13: Vector2<f64>,
    c23: Vector2<f64>,
}

/// Builds the separation coefficients of every pair in the 12-anchored frame.
pub fn pair_coefficients(masses: &MassConfig) -> JacobiFrame {
    let sx = 1.0 / (2.0 * masses.mu12).sqrt();
    let sy = 1.0 / (2.0 * masses.cap_m12).sqrt();
    let m12 = masses.m1 + masses.m2;
    // r2 - r1 = sx * x
    // r3 - r1 = (m2/m12) sx * x + sy * y
    // r3 - r2 = -(m1/m12) sx * x + sy * y
    JacobiFrame {
        masses: *masses,
        c12: Vector2::new(sx, 0.0),
        c13: Vector2::new(masses.m2 / m12 * sx, sy),
        c23: Vector2::new(-masses.m1 / m12 * sx, sy),
    }
}

impl JacobiFrame {
    pub fn new(masses: &MassConfig) -> Self {
        pair_coefficients(masses)
    }

    /// Coefficients expressing the pair separation vector as `c_x x + c_y y`.
    pub fn coeff(&self, pair: Pair) -> Vector2<f64> {
        match pair {
            Pair::P12 => self.c12,
            Pair::P13 => self.c13,
            Pair::P23 => self.c23,
        }
    }

    /// Norm of the separation coefficients; equals `1/sqrt(2 mu_pair)`.
    pub fn separation_scale(&self, pair: Pair) -> f64 {
        self.coeff(pair).norm()
    }

    /// Unit vector of the pair's own scaled separation coordinate in the
    /// (x, y) plane of Jacobi labels.
    pub fn pair_axis(&self, pair: Pair) -> Vector2<f64> {
        self.coeff(pair).normalize()
    }

    /// Unit vector of the pair's spectator coordinate. The mass-scaled Jacobi
    /// frames of different pairs are related by rotations of the (x, y)
    /// labels, so the spectator axis is the orthogonal complement of
    /// `pair_axis`.
    pub fn spectator_axis(&self, pair: Pair) -> Vector2<f64> {
        let c = self.pair_axis(pair);
        Vector2::new(-c.y, c.x)
    }

    /// Maps physical positions to the scaled Jacobi coordinates `(x, y)`.
    pub fn to_jacobi(
        &self,
        r1: Vector3<f64>,
        r2: Vector3<f64>,
        r3: Vector3<f64>,
    ) -> (Vector3<f64>, Vector3<f64>) {
        let m = &self.masses;
        let cm12 = (r1 * m.m1 + r2 * m.m2) / (m.m1 + m.m2);
        let x = (r2 - r1) * (2.0 * m.mu12).sqrt();
        let y = (r3 - cm12) * (2.0 * m.cap_m12).sqrt();
        (x, y)
    }

    /// Physical separation vector of a pair from Jacobi coordinates.
    pub fn separation(&self, pair: Pair, x: Vector3<f64>, y: Vector3<f64>) -> Vector3<f64> {
        let c = self.coeff(pair);
        x * c.x + y * c.y
    }
}

/// The three pair potentials of a system, stored with physical arguments.
#[derive(Debug, Clone, Copy)]
pub struct PairPotentials {
    pub v12: PairPotential,
    pub v13: PairPotential,
    pub v23: PairPotential,
}

impl PairPotentials {
    pub fn get(&self, pair: Pair) -> &PairPotential {
        match pair {
            Pair::P12 => &self.v12,
            Pair::P13 => &self.v13,
            Pair::P23 => &self.v23,
        }
    }

    /// Potential of `pair` as seen by its own scaled two-body problem
    /// `-Lap - lambda V(r / sqrt(2 mu))`: the reduced mass is folded into the
    /// potential argument.
    pub fn scaled_for_pair(&self, pair: Pair, masses: &MassConfig) -> Result<PairPotential> {
        let alpha = 1.0 / (2.0 * masses.mu(pair)).sqrt();
        self.get(pair).scaled_argument(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn equal_masses_textbook_values() {
        let m = reduced_masses(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.mu12, 0.5);
        assert_relative_eq!(m.cap_m12, 2.0 / 3.0);
        assert_relative_eq!(m.alpha, 1.0);
    }

    #[test]
    fn heavy_spectator_limit() {
        let m = reduced_masses(1.0, 1.0, 1e6).unwrap();
        assert!((m.cap_m12 - 2.0).abs() / 2.0 < 1e-5);
    }

    #[test]
    fn mu23_direct_arithmetic() {
        let m = reduced_masses(2.0, 3.0, 4.0).unwrap();
        assert_relative_eq!(m.mu23, 12.0 / 7.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_masses() {
        assert!(reduced_masses(0.0, 1.0, 1.0).is_err());
        assert!(reduced_masses(1.0, -2.0, 1.0).is_err());
        assert!(reduced_masses(1.0, f64::NAN, 1.0).is_err());
        assert!(reduced_masses(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn defining_pair_coefficients_equal_masses() {
        let m = reduced_masses(1.0, 1.0, 1.0).unwrap();
        let f = pair_coefficients(&m);
        let c = f.coeff(Pair::P12);
        assert_relative_eq!(c.x, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c.y, 0.0);
        // exchange symmetry 1 <-> 2
        assert_relative_eq!(
            f.coeff(Pair::P13).norm(),
            f.coeff(Pair::P23).norm(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn separation_scale_matches_reduced_mass() {
        for (m1, m2, m3) in [(1.0, 2.0, 3.0), (0.3, 1.7, 4.2), (1.0, 1.0, 1.0)] {
            let m = reduced_masses(m1, m2, m3).unwrap();
            let f = pair_coefficients(&m);
            for pair in Pair::ALL {
                assert_relative_eq!(
                    f.separation_scale(pair),
                    1.0 / (2.0 * m.mu(pair)).sqrt(),
                    max_relative = 1e-13
                );
            }
        }
    }

    proptest! {
        #[test]
        fn jacobi_round_trip(
            m1 in 0.1f64..10.0, m2 in 0.1f64..10.0, m3 in 0.1f64..10.0,
            p in proptest::collection::vec(-5.0f64..5.0, 9)
        ) {
            let m = reduced_masses(m1, m2, m3).unwrap();
            let f = pair_coefficients(&m);
            let r1 = Vector3::new(p[0], p[1], p[2]);
            let r2 = Vector3::new(p[3], p[4], p[5]);
            let r3 = Vector3::new(p[6], p[7], p[8]);
            let (x, y) = f.to_jacobi(r1, r2, r3);
            let pairs = [(Pair::P12, r2 - r1), (Pair::P13, r3 - r1), (Pair::P23, r3 - r2)];
            for (pair, expect) in pairs {
                let got = f.separation(pair, x, y);
                prop_assert!((got - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
            }
        }

        #[test]
        fn potential_scaling_is_linear(r in 0.0f64..20.0, depth in 0.0f64..5.0) {
            for shape in [Shape::Gaussian, Shape::Exponential, Shape::SquareWell] {
                let p1 = PairPotential::new(shape, depth, 1.3, 1.0).unwrap();
                let p2 = p1.with_lambda(2.0).unwrap();
                prop_assert!((p2.eval_unchecked(r) - 2.0 * p1.eval_unchecked(r)).abs() <= 1e-15 * (1.0 + depth));
            }
        }
    }

    #[test]
    fn potential_point_values() {
        let g = PairPotential::gaussian(1.0, 1.0).unwrap();
        assert_relative_eq!(evaluate_potential(&g, 0.0).unwrap(), 1.0);
        let sw = PairPotential::square_well(2.0, 1.0).unwrap();
        assert_relative_eq!(evaluate_potential(&sw, 1.5).unwrap(), 0.0);
        let e = PairPotential::exponential(1.0, 1.0).unwrap();
        assert_relative_eq!(evaluate_potential(&e, 1.0).unwrap(), (-1.0f64).exp());
        assert!(evaluate_potential(&g, -0.1).is_err());
    }

    #[test]
    fn falloff_witnesses_hold_on_dense_grid() {
        for shape in [Shape::Gaussian, Shape::Exponential, Shape::SquareWell] {
            let p = PairPotential::new(shape, 2.5, 1.7, 1.3).unwrap();
            assert!(
                p.falloff_bound_holds(10_000, 50.0 * p.range),
                "R1 bound violated for {shape:?}"
            );
        }
    }

    #[test]
    fn spectator_axis_is_orthogonal() {
        let m = reduced_masses(0.4, 1.0, 2.3).unwrap();
        let f = pair_coefficients(&m);
        for pair in Pair::ALL {
            let dot = f.pair_axis(pair).dot(&f.spectator_axis(pair));
            assert!(dot.abs() < 1e-15);
        }
    }
}
