use thiserror::Error;

/// Errors produced by the numerical kernels and physics modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that was required to be symmetric (or SPD) is not.
    #[error("input error: {0}")]
    Input(String),

    /// A quadrature or integrator could not reach the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// Root bracketing failed: no sign change on the given interval.
    #[error("bracketing error: no sign change on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    /// Overlap or system matrix too ill-conditioned to solve reliably.
    #[error("conditioning error: condition number {cond:.3e} exceeds {limit:.1e}; {advice}")]
    Conditioning {
        cond: f64,
        limit: f64,
        advice: String,
    },

    /// Two independent routes to the same quantity disagree beyond tolerance.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// A spectral gap that must be open by positivity closed up.
    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    /// A sampled parameter left its admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// A linear solve hit numerical singularity.
    #[error("singularity error: {msg}; smallest trustworthy k is {k_min:.3e}")]
    Singular { msg: String, k_min: f64 },

    /// An iteration failed to converge.
    #[error("convergence error: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
