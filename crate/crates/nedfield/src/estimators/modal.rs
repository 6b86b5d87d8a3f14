//! Global modal regression: `y_hat(x)` maximizes the kernel conditional
//! density estimate
//! `f_hat(y|x) = [(N h^{D+1})^{-1} sum K((X_i-x)/h) L((Y_i-y)/h)]
//!             / [(N h^D)^{-1} sum K((X_i-x)/h)]`
//! over the y-grid, with ties broken to the smallest y.

use super::{canonical_order, EstimatorError, KernelSpec};

/// Exhaustive y-grid argmax per x-grid point. Points where the marginal
/// kernel mass `(N h^D)^{-1} sum K_i` falls below `density_floor` are
/// returned as `None`.
#[allow(clippy::too_many_arguments)]
pub fn modal_regression(
    x: &[f64],
    dim: usize,
    y: &[f64],
    kernel_x: &KernelSpec,
    kernel_y: &KernelSpec,
    h: f64,
    x_grid: &[f64],
    y_grid: &[f64],
    density_floor: f64,
) -> Result<Vec<Option<f64>>, EstimatorError> {
    if h <= 0.0 {
        return Err(EstimatorError::NonPositiveBandwidth(h));
    }
    if x.is_empty() {
        return Err(EstimatorError::EmptySample);
    }
    if dim == 0 || x.len() % dim != 0 || x.len() / dim != y.len() || x_grid.len() % dim != 0 {
        return Err(EstimatorError::DimensionMismatch(format!(
            "x len {} y len {} x_grid len {} dim {dim}",
            x.len(),
            y.len(),
            x_grid.len()
        )));
    }
    let n = x.len() / dim;
    // Canonical order over (x, y) jointly for exact permutation invariance.
    let joint: Vec<f64> = (0..n)
        .flat_map(|i| {
            x[i * dim..(i + 1) * dim]
                .iter()
                .copied()
                .chain(std::iter::once(y[i]))
                .collect::<Vec<f64>>()
        })
        .collect();
    let order = canonical_order(&joint, dim + 1);

    let m = x_grid.len() / dim;
    let mut out = Vec::with_capacity(m);
    let mut u = vec![0.0; dim];
    let mut weights: Vec<(f64, f64)> = Vec::new();
    for g in 0..m {
        let xg = &x_grid[g * dim..(g + 1) * dim];
        weights.clear();
        let mut denom = 0.0f64;
        for &i in &order {
            let p = &x[i * dim..(i + 1) * dim];
            for k in 0..dim {
                u[k] = (p[k] - xg[k]) / h;
            }
            let w = kernel_x.eval_multi(&u);
            if w > 0.0 {
                weights.push((w, y[i]));
                denom += w;
            }
        }
        let marginal = denom / (n as f64 * h.powi(dim as i32));
        if marginal < density_floor {
            out.push(None);
            continue;
        }
        // L has support [-1, 1], so only responses within h of a y-grid
        // point contribute; sort by response once per x-grid point.
        weights.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.partial_cmp(&b.0).unwrap()));
        let mut best_y = f64::NAN;
        let mut best_val = f64::NEG_INFINITY;
        for &yg in y_grid {
            let lo = weights.partition_point(|&(_, yi)| yi < yg - h);
            let hi = weights.partition_point(|&(_, yi)| yi <= yg + h);
            let num: f64 = weights[lo..hi]
                .iter()
                .map(|&(w, yi)| w * kernel_y.eval1((yi - yg) / h))
                .sum();
            // Strict improvement keeps the smallest maximizing y when the
            // grid is ascending.
            if num > best_val {
                best_val = num;
                best_y = yg;
            }
        }
        out.push(Some(best_y));
    }
    Ok(out)
}
