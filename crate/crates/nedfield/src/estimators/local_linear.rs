//! Local linear regression: per grid point solve
//! `theta_hat = S_N(x)^{-1} T_N(x)` with
//! `S_N = N^{-1} sum K_ih U_i U_i^T`, `T_N = N^{-1} sum K_ih U_i Y_i`,
//! `U_i = (1, (X_i - x)/h)`, `K_ih = h^{-D} K((X_i - x)/h)`.

use nalgebra::{DMatrix, DVector};

use super::solve::ridge_solve;
use super::{canonical_order, window, EstimatorError, EstimatorFit, KernelSpec, PointDiagnostics};

/// Fit `m_hat` on the flat `grid`; `x` holds `dim` coordinates per sample
/// point. Grid points with zero effective kernel mass are flagged undefined
/// (NaN value), not extrapolated.
pub fn local_linear(
    x: &[f64],
    dim: usize,
    y: &[f64],
    kernel: &KernelSpec,
    h: f64,
    grid: &[f64],
) -> Result<EstimatorFit, EstimatorError> {
    if h <= 0.0 {
        return Err(EstimatorError::NonPositiveBandwidth(h));
    }
    if x.is_empty() {
        return Err(EstimatorError::EmptySample);
    }
    if dim == 0 || x.len() % dim != 0 || x.len() / dim != y.len() || grid.len() % dim != 0 {
        return Err(EstimatorError::DimensionMismatch(format!(
            "x len {} y len {} grid len {} dim {dim}",
            x.len(),
            y.len(),
            grid.len()
        )));
    }
    let n = x.len() / dim;
    let p = dim + 1;
    let m = grid.len() / dim;
    let mut values = Vec::with_capacity(m);
    let mut diagnostics = Vec::with_capacity(m);

    // Canonical order plus, in 1D, a sorted array for window lookups.
    let order = canonical_order(x, dim);
    let sorted_1d: Option<(Vec<f64>, Vec<f64>)> = (dim == 1).then(|| {
        let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        (xs, ys)
    });

    let mut u = vec![0.0; dim];
    for g in 0..m {
        let z = &grid[g * dim..(g + 1) * dim];
        let mut s = DMatrix::zeros(p, p);
        let mut t = DVector::zeros(p);
        let mut mass = 0.0f64;
        let mut accumulate = |xi: &[f64], yi: f64| {
            for k in 0..dim {
                u[k] = (xi[k] - z[k]) / h;
            }
            let w = kernel.eval_multi(&u) / h.powi(dim as i32);
            if w == 0.0 {
                return;
            }
            mass += w;
            let mut uvec = DVector::zeros(p);
            uvec[0] = 1.0;
            for k in 0..dim {
                uvec[k + 1] = u[k];
            }
            s.syger(w / n as f64, &uvec, &uvec, 1.0);
            t.axpy(w * yi / n as f64, &uvec, 1.0);
        };
        match &sorted_1d {
            Some((xs, ys)) => {
                let (lo, hi) = window(xs, z[0], h);
                for i in lo..hi {
                    accumulate(&xs[i..=i], ys[i]);
                }
            }
            None => {
                for &i in &order {
                    accumulate(&x[i * dim..(i + 1) * dim], y[i]);
                }
            }
        }
        if mass == 0.0 {
            values.push(f64::NAN);
            diagnostics.push(PointDiagnostics::undefined());
            continue;
        }
        // syger fills the lower triangle; mirror it.
        for r in 0..p {
            for c in (r + 1)..p {
                s[(r, c)] = s[(c, r)];
            }
        }
        let (theta, diag) = ridge_solve(&mut s, &t);
        match theta {
            Some(th) => values.push(th[0]),
            None => values.push(f64::NAN),
        }
        diagnostics.push(diag);
    }
    Ok(EstimatorFit {
        grid: grid.to_vec(),
        dim,
        values,
        h,
        diagnostics,
    })
}
