//! Kernel density estimator `f_hat(z) = (N h^D)^{-1} sum_i K((Z_i - z)/h)`.

use super::{canonical_order, window, EstimatorError, EstimatorFit, KernelSpec, PointDiagnostics};

/// Evaluate the KDE of a `dim`-dimensional sample on the flat `grid`
/// (`dim` coordinates per grid point).
pub fn kde(
    sample: &[f64],
    dim: usize,
    kernel: &KernelSpec,
    h: f64,
    grid: &[f64],
) -> Result<EstimatorFit, EstimatorError> {
    if h <= 0.0 {
        return Err(EstimatorError::NonPositiveBandwidth(h));
    }
    if sample.is_empty() {
        return Err(EstimatorError::EmptySample);
    }
    if dim == 0 || sample.len() % dim != 0 || grid.len() % dim != 0 {
        return Err(EstimatorError::DimensionMismatch(format!(
            "sample len {} grid len {} dim {dim}",
            sample.len(),
            grid.len()
        )));
    }
    let n = sample.len() / dim;
    let norm = 1.0 / (n as f64 * h.powi(dim as i32));
    let m = grid.len() / dim;
    let mut values = Vec::with_capacity(m);

    if dim == 1 {
        let mut xs = sample.to_vec();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for g in 0..m {
            let z = grid[g];
            let (lo, hi) = window(&xs, z, h);
            let sum: f64 = xs[lo..hi].iter().map(|&x| kernel.eval1((x - z) / h)).sum();
            values.push(sum * norm);
        }
    } else {
        let order = canonical_order(sample, dim);
        let mut u = vec![0.0; dim];
        for g in 0..m {
            let z = &grid[g * dim..(g + 1) * dim];
            let mut sum = 0.0;
            for &i in &order {
                let p = &sample[i * dim..(i + 1) * dim];
                for k in 0..dim {
                    u[k] = (p[k] - z[k]) / h;
                }
                sum += kernel.eval_multi(&u);
            }
            values.push(sum * norm);
        }
    }
    let diagnostics = vec![
        PointDiagnostics {
            min_eigenvalue: f64::NAN,
            ridge_applied: false,
            defined: true,
        };
        m
    ];
    Ok(EstimatorFit {
        grid: grid.to_vec(),
        dim,
        values,
        h,
        diagnostics,
    })
}
