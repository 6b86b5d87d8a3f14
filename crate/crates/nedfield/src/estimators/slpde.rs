//! Simple local polynomial density estimator: local polynomial regression of
//! the empirical CDF.
//!
//! `theta_hat(x) = U_N(x)^{-1} V_N(x)` with
//! `U_N = N^{-1} sum K_ih u_i u_i^T`, `V_N = N^{-1} sum K_ih u_i F_N(X_i)`,
//! `u_i = (1, v, v^2, ..., v^p)` at `v = (X_i - x)/h`, `K_ih = h^{-1} K(v)`.
//! Derivatives come out as `F_hat^{(k)}(x) = k! theta_{k+1}(x) / h^k`; the
//! density estimate is `F_hat'`.

use nalgebra::{DMatrix, DVector};

use super::solve::ridge_solve;
use super::{window, EstimatorError, KernelSpec, PointDiagnostics};

/// Per-order derivative fits of the smoothed empirical CDF.
#[derive(Debug, Clone)]
pub struct SlpdeFit {
    pub grid: Vec<f64>,
    /// `derivatives[k]` holds `F_hat^{(k)}` on the grid, `k = 0..=order`.
    pub derivatives: Vec<Vec<f64>>,
    pub h: f64,
    pub order: usize,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl SlpdeFit {
    /// The density estimate `F_hat'`.
    pub fn density(&self) -> &[f64] {
        &self.derivatives[1]
    }
}

/// Right-continuous empirical CDF values at the sorted sample points:
/// `F_N(X_(i)) = i/N` (upper rank under ties).
fn empirical_cdf_at_sorted(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut f = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[j + 1] == xs[i] {
            j += 1;
        }
        let val = (j + 1) as f64 / n as f64;
        for k in i..=j {
            f[k] = val;
        }
        i = j + 1;
    }
    f
}

pub fn slpde(
    x: &[f64],
    kernel: &KernelSpec,
    h: f64,
    order: usize,
    grid: &[f64],
) -> Result<SlpdeFit, EstimatorError> {
    if h <= 0.0 {
        return Err(EstimatorError::NonPositiveBandwidth(h));
    }
    if x.is_empty() {
        return Err(EstimatorError::EmptySample);
    }
    if order == 0 {
        return Err(EstimatorError::BadParameter(
            "polynomial order must be at least 1".into(),
        ));
    }
    let n = x.len();
    let mut xs = x.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let fn_vals = empirical_cdf_at_sorted(&xs);

    let p = order + 1;
    let mut derivatives = vec![Vec::with_capacity(grid.len()); p];
    let mut diagnostics = Vec::with_capacity(grid.len());
    let mut powers = vec![0.0; 2 * p - 1];
    for &z in grid {
        let (lo, hi) = window(&xs, z, h);
        let mut s = DMatrix::zeros(p, p);
        let mut t = DVector::zeros(p);
        let mut mass = 0.0f64;
        for i in lo..hi {
            let v = (xs[i] - z) / h;
            let w = kernel.eval1(v) / h;
            if w == 0.0 {
                continue;
            }
            mass += w;
            powers[0] = 1.0;
            for k in 1..2 * p - 1 {
                powers[k] = powers[k - 1] * v;
            }
            for r in 0..p {
                for c in 0..p {
                    s[(r, c)] += w * powers[r + c] / n as f64;
                }
                t[r] += w * powers[r] * fn_vals[i] / n as f64;
            }
        }
        if mass == 0.0 {
            for d in derivatives.iter_mut() {
                d.push(f64::NAN);
            }
            diagnostics.push(PointDiagnostics::undefined());
            continue;
        }
        let (theta, diag) = ridge_solve(&mut s, &t);
        match theta {
            Some(th) => {
                let mut fact = 1.0f64;
                for (k, d) in derivatives.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    d.push(fact * th[k] / h.powi(k as i32));
                }
            }
            None => {
                for d in derivatives.iter_mut() {
                    d.push(f64::NAN);
                }
            }
        }
        diagnostics.push(diag);
    }
    Ok(SlpdeFit {
        grid: grid.to_vec(),
        derivatives,
        h,
        order,
        diagnostics,
    })
}
