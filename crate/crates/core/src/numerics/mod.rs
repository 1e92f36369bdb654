//! Shared numerical kernels: quadrature, eigensolvers, root finding, and the
//! Numerov radial integrator used as the independent oracle.

mod eig;
mod quadrature;
mod radial;
mod roots;

pub use eig::{
    gen_sym_eig_min, gen_sym_eig_min_pruned, sym_eig_top, top_eigenpair_nonneg,
    top_two_eigenvalues, EigSolution, GenEigSolution, CONDITION_LIMIT, OVERLAP_CUTOFF,
};
pub use quadrature::{composite_gauss_legendre, gauss_legendre, QuadratureRule};
pub use radial::{
    numerov_inward_log_derivative, numerov_outward, radial_integrate, RadialSolution,
};
pub use roots::brent_root;
