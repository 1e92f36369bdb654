//! Numerical laboratory for two-body coupling-constant thresholds,
//! zero-energy resonance data, Birman-Schwinger spectral expansions, and the
//! three-body threshold/spreading scenario.
//!
//! The crate is organized around the physics:
//!
//! - [`model`]: masses, Jacobi frames, pair potentials with certified
//!   exponential falloff.
//! - [`numerics`]: quadrature, dense symmetric / generalized eigensolvers,
//!   Brent root finding, Numerov radial integration.
//! - [`twobody`]: the s-wave Birman-Schwinger operator `L(k)`, coupling
//!   thresholds, the resonance function and its slope coefficient, and the
//!   `W(k) = (1 - L(k))^{-1}` pole decomposition.
//! - [`bounds`]: numerical checks of the auxiliary integral estimates (the
//!   logarithmic divergence, the 6D Green's-function bound, the exponential
//!   kernel inequality).
//! - [`threebody`]: a correlated-Gaussian variational solver for
//!   `H(Theta, Lambda)` with threshold location and spreading diagnostics.

pub mod bounds;
pub mod error;
pub mod model;
pub mod numerics;
pub mod threebody;
pub mod twobody;

pub use error::{Error, Result};
pub use model::{
    evaluate_potential, pair_coefficients, reduced_masses, JacobiFrame, MassConfig, Pair,
    PairPotential, PairPotentials, Shape,
};
