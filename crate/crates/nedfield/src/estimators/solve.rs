//! Small symmetric least-squares solves with the ridge fallback shared by
//! the local polynomial estimators.

use nalgebra::{DMatrix, DVector};

use super::PointDiagnostics;

/// Solve `S theta = t` for a symmetric positive semidefinite `S`.
///
/// When the smallest eigenvalue falls below `1e-10` times the largest, a
/// ridge `1e-8 * trace / dim` is added to the diagonal and the activation is
/// recorded in the diagnostics.
pub(crate) fn ridge_solve(
    s: &mut DMatrix<f64>,
    t: &DVector<f64>,
) -> (Option<DVector<f64>>, PointDiagnostics) {
    let dim = s.nrows();
    let eig = s.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut ridge_applied = false;
    if !(min_eig > 1e-10 * max_eig.abs()) {
        let eps = 1e-8 * s.trace() / dim as f64;
        if !(eps > 0.0) {
            // Zero design matrix: no kernel mass at all.
            return (None, PointDiagnostics::undefined());
        }
        for k in 0..dim {
            s[(k, k)] += eps;
        }
        ridge_applied = true;
    }
    let lu = s.clone().lu();
    let theta = lu.solve(t).map(|mut x| {
        // One step of iterative refinement tightens the solve on the
        // moderately conditioned windows local fits produce.
        let residual = t - &*s * &x;
        if let Some(correction) = lu.solve(&residual) {
            x += correction;
        }
        x
    });
    let diag = PointDiagnostics {
        min_eigenvalue: min_eig,
        ridge_applied,
        defined: theta.is_some(),
    };
    (theta, diag)
}
