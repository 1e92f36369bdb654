//! Dense symmetric and generalized symmetric eigensolvers.
//!
//! Matrices in this project stay below ~2000x2000, so everything is dense
//! and deterministic. The generalized problem is reduced with a Cholesky
//! factor when the overlap is well conditioned; ill-conditioned overlaps go
//! through canonical orthogonalization with an eigenvalue cutoff.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition-number ceiling beyond which a generalized solve is refused.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Default overlap-eigenvalue cutoff for basis pruning.
pub const OVERLAP_CUTOFF: f64 = 1e-12;

/// Eigenpairs sorted by descending eigenvalue, with per-pair residuals
/// `|A v - lambda v|`.
#[derive(Debug, Clone)]
pub struct EigSolution {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
}

fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Input(format!(
            "matrix is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = max_abs(a);
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Input(format!(
            "matrix asymmetry {worst:.3e} exceeds 1e-12 * |A| = {:.3e}",
            1e-12 * scale
        )));
    }
    Ok(())
}

/// Full symmetric eigendecomposition, eigenvalues descending.
fn sym_eig_all(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let se = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Top `count` eigenpairs (by algebraic value) of a symmetric matrix.
pub fn sym_eig_top(a: &DMatrix<f64>, count: usize, tol: f64) -> Result<EigSolution> {
    check_symmetric(a)?;
    if count == 0 || count > a.nrows() {
        return Err(Error::Domain(format!(
            "count must be in 1..={}, got {count}",
            a.nrows()
        )));
    }
    let (values, vectors) = sym_eig_all(a);
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let mut top_vals = Vec::with_capacity(count);
    let mut top_vecs = DMatrix::zeros(a.nrows(), count);
    let mut residuals = Vec::with_capacity(count);
    for i in 0..count {
        let v = vectors.column(i);
        let r = (a * v - v * values[i]).norm();
        if !r.is_finite() || !values[i].is_finite() || r > tol * scale {
            return Err(Error::Convergence(format!(
                "eigenpair {i} residual {r:.3e} exceeds tol * |A| = {:.3e}",
                tol * scale
            )));
        }
        top_vals.push(values[i]);
        top_vecs.set_column(i, &v);
        residuals.push(r);
    }
    Ok(EigSolution {
        values: top_vals,
        vectors: top_vecs,
        residuals,
    })
}

/// Dominant eigenpair of a symmetric entrywise-nonnegative matrix by power
/// iteration. Fast in the sweep loops, where the Perron gap is open; falls
/// back to the dense solver when the gap is too tight to converge.
pub fn top_eigenpair_nonneg(a: &DMatrix<f64>, tol: f64) -> (f64, DVector<f64>) {
    let n = a.nrows();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    // start from the row-sum vector: positive overlap with the Perron vector
    let mut v = DVector::from_fn(n, |i, _| a.row(i).sum().max(scale * 1e-300) + scale * 1e-30);
    v /= v.norm();
    let mut mu;
    for _ in 0..20_000 {
        let av = a * &v;
        mu = v.dot(&av);
        let res = (&av - &v * mu).norm();
        let norm = av.norm();
        if norm == 0.0 {
            break;
        }
        v = av / norm;
        if res <= tol * scale {
            return (mu, v);
        }
    }
    let (values, vectors) = sym_eig_all(a);
    (values[0], vectors.column(0).into_owned())
}

/// Top two eigenvalues of a symmetric nonnegative matrix: power iteration
/// plus one rank-one deflation step, with the dense fallback inherited from
/// `top_eigenpair_nonneg`.
pub fn top_two_eigenvalues(a: &DMatrix<f64>, tol: f64) -> (f64, f64, DVector<f64>) {
    let (mu1, v1) = top_eigenpair_nonneg(a, tol);
    let n = a.nrows();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let mut w = DVector::from_fn(n, |i, _| ((i * 2654435761) % 1000) as f64 / 1000.0 + 0.5);
    w -= &v1 * v1.dot(&w);
    let mut mu2 = 0.0;
    let mut converged = false;
    if w.norm() > 0.0 {
        w /= w.norm();
        for _ in 0..20_000 {
            let mut aw = a * &w;
            aw -= &v1 * (mu1 * v1.dot(&w));
            mu2 = w.dot(&aw);
            let res = (&aw - &w * mu2).norm();
            let norm = aw.norm();
            if norm == 0.0 {
                break;
            }
            w = aw / norm;
            w -= &v1 * v1.dot(&w);
            if res <= tol * scale {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        let (values, vectors) = sym_eig_all(a);
        return (values[0], values[1], vectors.column(0).into_owned());
    }
    (mu1, mu2, v1)
}

/// Result of a generalized symmetric solve `H v = lambda S v`.
#[derive(Debug, Clone)]
pub struct GenEigSolution {
    /// Smallest generalized eigenvalue.
    pub value: f64,
    /// Eigenvector, S-orthonormal: `v^T S v = 1`.
    pub vector: DVector<f64>,
    /// Condition number of the overlap matrix (full spectrum).
    pub condition: f64,
    /// Dimension of the solved problem after any pruning.
    pub kept: usize,
}

/// Smallest eigenpair of `H v = lambda S v` with SPD overlap `S`, via
/// Cholesky reduction. Refuses overlaps with condition number above
/// `CONDITION_LIMIT`; callers holding a near-dependent basis should prune
/// with [`gen_sym_eig_min_pruned`].
pub fn gen_sym_eig_min(h: &DMatrix<f64>, s: &DMatrix<f64>, tol: f64) -> Result<GenEigSolution> {
    check_symmetric(h)?;
    check_symmetric(s)?;
    let (s_vals, _) = sym_eig_all(s);
    let smax = s_vals[0];
    let smin = *s_vals.last().unwrap();
    if smin <= 0.0 {
        return Err(Error::Conditioning {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
            advice: "overlap matrix is not positive definite; prune the basis".into(),
        });
    }
    let cond = smax / smin;
    if cond > CONDITION_LIMIT {
        return Err(Error::Conditioning {
            cond,
            limit: CONDITION_LIMIT,
            advice: "prune the basis by overlap-eigenvalue cutoff".into(),
        });
    }
    let chol = s.clone().cholesky().ok_or_else(|| Error::Conditioning {
        cond,
        limit: CONDITION_LIMIT,
        advice: "Cholesky factorization failed; prune the basis".into(),
    })?;
    let l = chol.l();
    // C = L^-1 H L^-T, ordinary symmetric problem
    let x = l
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::Conditioning {
            cond,
            limit: CONDITION_LIMIT,
            advice: "triangular solve failed; prune the basis".into(),
        })?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Conditioning {
            cond,
            limit: CONDITION_LIMIT,
            advice: "triangular solve failed; prune the basis".into(),
        })?;
    let c = (&c + c.transpose()) * 0.5;
    let (values, vectors) = sym_eig_all(&c);
    let min_idx = values.len() - 1;
    let q = vectors.column(min_idx).into_owned();
    // back-transform: v = L^-T q
    let v = l
        .tr_solve_lower_triangular(&q)
        .ok_or_else(|| Error::Conditioning {
            cond,
            limit: CONDITION_LIMIT,
            advice: "triangular back-substitution failed".into(),
        })?;
    let _ = tol;
    Ok(GenEigSolution {
        value: values[min_idx],
        vector: v,
        condition: cond,
        kept: h.nrows(),
    })
}

/// Smallest eigenpair of `H v = lambda S v` through canonical
/// orthogonalization: overlap eigendirections with eigenvalue below
/// `cutoff * max` are discarded before the solve. Always succeeds on an
/// overlap with at least one healthy direction.
pub fn gen_sym_eig_min_pruned(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
    cutoff: f64,
) -> Result<GenEigSolution> {
    check_symmetric(h)?;
    check_symmetric(s)?;
    let n = s.nrows();
    let (s_vals, s_vecs) = sym_eig_all(s);
    let smax = s_vals[0];
    if !(smax > 0.0) {
        return Err(Error::Conditioning {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
            advice: "overlap matrix has no positive eigenvalue".into(),
        });
    }
    let kept: Vec<usize> = (0..n).filter(|&i| s_vals[i] > cutoff * smax).collect();
    if kept.is_empty() {
        return Err(Error::Conditioning {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
            advice: "overlap cutoff removed every direction".into(),
        });
    }
    let smin_full = s_vals.last().unwrap().max(f64::MIN_POSITIVE);
    let cond = smax / smin_full;
    // X = U_kept diag(1/sqrt(sigma)); columns S-orthonormal
    let mut x = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        x.set_column(col, &(s_vecs.column(i) / s_vals[i].sqrt()));
    }
    let hp = x.transpose() * h * &x;
    let hp = (&hp + hp.transpose()) * 0.5;
    let (values, vectors) = sym_eig_all(&hp);
    let min_idx = values.len() - 1;
    let v = &x * vectors.column(min_idx);
    Ok(GenEigSolution {
        value: values[min_idx],
        vector: v,
        condition: cond,
        kept: kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let a = DMatrix::identity(3, 3);
        let sol = sym_eig_top(&a, 3, 1e-10).unwrap();
        for v in &sol.values {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn diagonal_top_pair() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let sol = sym_eig_top(&a, 1, 1e-10).unwrap();
        assert_relative_eq!(sol.values[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(sol.vectors[(0, 0)].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn residuals_small_on_random_matrix() {
        let a = random_symmetric(50, 7);
        let sol = sym_eig_top(&a, 50, 1e-10).unwrap();
        assert!(sol.residuals.iter().all(|&r| r <= 1e-10));
        // orthonormality of the eigenvector set
        let g = sol.vectors.transpose() * &sol.vectors;
        for i in 0..50 {
            for j in 0..50 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut a = random_symmetric(5, 1);
        a[(0, 4)] += 1e-3;
        assert!(matches!(sym_eig_top(&a, 1, 1e-10), Err(Error::Input(_))));
    }

    #[test]
    fn power_iteration_matches_dense() {
        let mut a = random_symmetric(40, 3);
        a.iter_mut().for_each(|x| *x = x.abs());
        let (mu, v) = top_eigenpair_nonneg(&a, 1e-13);
        let sol = sym_eig_top(&a, 2, 1e-9).unwrap();
        assert_relative_eq!(mu, sol.values[0], epsilon = 1e-11);
        assert!(
            (&a * &v - &v * mu).norm()
                <= 1e-12 * a.iter().fold(0.0f64, |m, &x| m.max(x.abs())) * 40.0
        );
        let (m1, m2, _) = top_two_eigenvalues(&a, 1e-13);
        assert_relative_eq!(m1, sol.values[0], epsilon = 1e-11);
        assert_relative_eq!(m2, sol.values[1], epsilon = 1e-9);
    }

    #[test]
    fn generalized_reduces_to_ordinary_for_identity_overlap() {
        let h = random_symmetric(8, 11);
        let s = DMatrix::identity(8, 8);
        let sol = gen_sym_eig_min(&h, &s, 1e-10).unwrap();
        let all = sym_eig_top(&h, 8, 1e-9).unwrap();
        assert_relative_eq!(sol.value, *all.values.last().unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn proportional_matrices_give_the_ratio() {
        let mut s = random_symmetric(10, 5);
        s = &s * s.transpose() + DMatrix::identity(10, 10); // SPD
        let h = &s * 2.0;
        let sol = gen_sym_eig_min(&h, &s, 1e-10).unwrap();
        assert_relative_eq!(sol.value, 2.0, epsilon = 1e-12);
        // S-orthonormal eigenvector
        let snorm = (sol.vector.transpose() * &s * &sol.vector)[(0, 0)];
        assert_relative_eq!(snorm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn generalized_matches_dense_inverse_oracle() {
        let h = random_symmetric(10, 21);
        let mut s = random_symmetric(10, 22);
        s = &s * s.transpose() + DMatrix::identity(10, 10);
        let sol = gen_sym_eig_min(&h, &s, 1e-10).unwrap();
        // oracle: eigenvalues of S^-1 H (non-symmetric dense route)
        let si = s.clone().try_inverse().unwrap();
        let m = si * &h;
        let ev = m.complex_eigenvalues();
        let min_real = ev.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(sol.value, min_real, epsilon = 1e-9);
    }

    #[test]
    fn singular_overlap_is_a_conditioning_error() {
        let h = random_symmetric(4, 2);
        let mut s = DMatrix::identity(4, 4);
        s[(3, 3)] = 1e-16;
        match gen_sym_eig_min(&h, &s, 1e-10) {
            Err(Error::Conditioning { advice, .. }) => {
                assert!(advice.contains("prune"));
            }
            other => panic!("expected conditioning error, got {other:?}"),
        }
        // the pruned route handles the same input
        let sol = gen_sym_eig_min_pruned(&h, &s, OVERLAP_CUTOFF).unwrap();
        assert_eq!(sol.kept, 3);
    }

    #[test]
    fn pruned_route_matches_plain_when_well_conditioned() {
        let h = random_symmetric(9, 31);
        let mut s = random_symmetric(9, 32);
        s = &s * s.transpose() + DMatrix::identity(9, 9);
        let a = gen_sym_eig_min(&h, &s, 1e-10).unwrap();
        let b = gen_sym_eig_min_pruned(&h, &s, OVERLAP_CUTOFF).unwrap();
        assert_relative_eq!(a.value, b.value, epsilon = 1e-11);
        assert_eq!(b.kept, 9);
    }
}
