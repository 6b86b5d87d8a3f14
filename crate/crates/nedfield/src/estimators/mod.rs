//! The five kernel estimators and the level-set performance measures.
//!
//! Every estimator is a pure function of a sample, a kernel, and a
//! bandwidth. Samples are re-ordered internally (lexicographically by
//! coordinates) before accumulation, so outputs are exactly invariant under
//! permutation of the sample order.

mod empirical;
mod solve;
mod kde;
mod kernel;
mod level_set;
mod local_linear;
mod modal;
mod slpde;

pub use empirical::sup_interval_deviation;
pub use kde::kde;
pub use kernel::{KernelFamily, KernelSpec};
pub use level_set::{
    distances, level_set_mask, rho_exponent_fit, LevelSetResult, RhoExponentFit,
};
pub use local_linear::local_linear;
pub use modal::modal_regression;
pub use slpde::{slpde, SlpdeFit};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("kernel validation failed: {0}")]
    BadKernel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Per-grid-point conditioning diagnostics of a local least-squares solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    /// Smallest eigenvalue of the local design matrix (NaN where no solve
    /// happened).
    pub min_eigenvalue: f64,
    pub ridge_applied: bool,
    /// False where the estimate is undefined (zero effective kernel mass).
    pub defined: bool,
}

impl PointDiagnostics {
    pub(crate) fn undefined() -> Self {
        PointDiagnostics {
            min_eigenvalue: f64::NAN,
            ridge_applied: false,
            defined: false,
        }
    }
}

/// Fitted values on an evaluation grid.
#[derive(Debug, Clone)]
pub struct EstimatorFit {
    /// Flat grid coordinates, `dim` per point.
    pub grid: Vec<f64>,
    pub dim: usize,
    /// One value per grid point; NaN where undefined.
    pub values: Vec<f64>,
    pub h: f64,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl EstimatorFit {
    pub fn ridge_activations(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.ridge_applied).count()
    }

    pub fn undefined_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| !d.defined).count()
    }
}

/// Evenly spaced 1D grid `a:b:n` (n points, endpoints included).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid1 {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid1 {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self, EstimatorError> {
        if n < 2 || !(b > a) {
            return Err(EstimatorError::BadParameter(format!(
                "grid needs b > a and n >= 2, got {a}:{b}:{n}"
            )));
        }
        Ok(Grid1 { a, b, n })
    }

    pub fn pitch(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let step = self.pitch();
        (0..self.n).map(|i| self.a + step * i as f64).collect()
    }

    /// Parse the CLI form `a:b:n`.
    pub fn parse(text: &str) -> Result<Self, EstimatorError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(EstimatorError::BadParameter(format!(
                "grid spec must be a:b:n, got {text}"
            )));
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| EstimatorError::BadParameter(format!("bad grid start {}", parts[0])))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| EstimatorError::BadParameter(format!("bad grid end {}", parts[1])))?;
        let n: usize = parts[2]
            .parse()
            .map_err(|_| EstimatorError::BadParameter(format!("bad grid count {}", parts[2])))?;
        Grid1::new(a, b, n)
    }
}

/// Indices of `sorted` falling in `[x - h, x + h]`.
pub(crate) fn window(sorted: &[f64], x: f64, h: f64) -> (usize, usize) {
    let lo = sorted.partition_point(|&v| v < x - h);
    let hi = sorted.partition_point(|&v| v <= x + h);
    (lo, hi)
}

/// Sample order sorted lexicographically by coordinates; applying this order
/// before accumulation makes sums independent of the input permutation.
pub(crate) fn canonical_order(flat: &[f64], dim: usize) -> Vec<usize> {
    let n = flat.len() / dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let a = &flat[i * dim..(i + 1) * dim];
        let b = &flat[j * dim..(j + 1) * dim];
        a.partial_cmp(b).unwrap()
    });
    order
}

/// Ordinary least squares of `ys` on `xs`; returns (slope, intercept).
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
