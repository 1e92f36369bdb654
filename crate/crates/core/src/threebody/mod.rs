//! Correlated-Gaussian variational laboratory for the tunable three-body
//! Hamiltonian `H(Theta, Lambda) = [-Lap_x - V12] - Lap_y - Theta V13 -
//! Lambda V23`: subsystem thresholds, the binding onset `Theta_0`, Efimov
//! non-emptiness, and the near-threshold spreading of the ground state.

mod basis;
mod elements;
mod scan;

pub use basis::{eigenvalues_2x2, BasisRecipe, GaussianBasis};
pub use elements::{hamiltonian_elements, norm_factor, ThreeBodyPotentials};
pub use scan::{
    empirical_epsilon, ground_state, spreading_metric, theta_scan, two_body_subthresholds,
    xi2_moment, ScanContext, ScanRecord, SubThresholds, ThetaScan, VariationalResult, TOL_BIND,
};
