//! Monte Carlo orchestration: tail-domination verification, rate studies,
//! effective-dimension comparison, and level-set studies.
//!
//! Replications run on deterministic per-replication streams (see
//! [`crate::parallel`]), so every study reproduces bit-identically from its
//! config and seed regardless of worker count.

mod dim;
mod levelset;
mod rates;

pub use dim::{run_effective_dimension_study, DimStudy};
pub use levelset::{run_levelset_study, LevelSetStudy, LevelSetStudyConfig};
pub use rates::{
    run_boundary_comparison, run_loclin_rate_study, run_modal_rate_study, run_slpde_rate_study,
    BoundaryComparison, LoclinStudyConfig, ModalStudyConfig, SlpdeStudyConfig,
};

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{
    bound_corollary1, bound_theorem1, bound_theorem2, BoundError, DependenceParams,
    GeometryParams, TailBound,
};
use crate::fields::{FieldError, FieldGenerator};
use crate::parallel::run_reps;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("field error: {0}")]
    Field(#[from] FieldError),
    #[error("geometry error: {0}")]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error("bound error: {0}")]
    Bound(#[from] BoundError),
    #[error("estimator error: {0}")]
    Estimator(#[from] crate::estimators::EstimatorError),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Empirical tail frequencies of `|N^{-1} sum Z| >= t` over replications.
#[derive(Debug, Clone, Serialize)]
pub struct TailEstimate {
    pub t: Vec<f64>,
    pub freq: Vec<f64>,
    /// Binomial standard error `sqrt(p (1-p) / R)` per threshold.
    pub se: Vec<f64>,
    pub r: u64,
    pub n: usize,
    pub seed: u64,
}

/// Which closed-form bound the verification pairs against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundSelector {
    Theorem1,
    Corollary1,
    Theorem2 { q: u64 },
}

/// One threshold's domination check.
#[derive(Debug, Clone, Serialize)]
pub struct TailCheckRow {
    pub t: f64,
    pub empirical: f64,
    pub se: f64,
    pub bound: f64,
    /// False when `N < valid_from_N`, in which case the row auto-passes.
    pub in_validity_range: bool,
    pub pass: bool,
}

/// Paired empirical tail and bound table with the domination verdict.
#[derive(Debug, Clone, Serialize)]
pub struct TailVerification {
    pub estimate: TailEstimate,
    pub bounds: Vec<TailBound>,
    pub rows: Vec<TailCheckRow>,
    pub pass: bool,
}

/// Verify `empirical + 3 SE <= bound` for every threshold inside the bound's
/// validity range. Bounds above 1 auto-pass so finite-R noise cannot fail a
/// vacuous inequality. `use_base_only` evaluates the innovation field itself
/// (the alpha-mixing case) instead of the NED layer.
#[allow(clippy::too_many_arguments)]
pub fn run_tail_verification(
    gen: &FieldGenerator,
    dep: &DependenceParams,
    geo: &GeometryParams,
    selector: BoundSelector,
    t_grid: &[f64],
    r: u64,
    seed: u64,
    threads: usize,
    use_base_only: bool,
) -> Result<TailVerification, ExperimentError> {
    if r < 500 {
        return Err(ExperimentError::BadParameter(format!(
            "tail verification needs R >= 500, got {r}"
        )));
    }
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = gen.ls.len();

    let abs_means: Vec<f64> = run_reps(r, threads, |rep| {
        let values = if use_base_only {
            gen.innovations(seed, rep).values
        } else {
            gen.generate(seed, rep).values
        };
        (values.iter().sum::<f64>() / n as f64).abs()
    });

    let rf = r as f64;
    let mut freq = Vec::with_capacity(ts.len());
    let mut se = Vec::with_capacity(ts.len());
    for &t in &ts {
        let count = abs_means.iter().filter(|&&m| m >= t).count() as f64;
        let p = count / rf;
        freq.push(p);
        se.push((p * (1.0 - p) / rf).sqrt());
    }

    let mut bounds = Vec::with_capacity(ts.len());
    for &t in &ts {
        let b = match selector {
            BoundSelector::Theorem1 => bound_theorem1(dep, geo, n as u64, t)?,
            BoundSelector::Corollary1 => bound_corollary1(dep, geo, n as u64, t)?,
            BoundSelector::Theorem2 { q } => bound_theorem2(dep, geo, n as u64, t, q)?,
        };
        bounds.push(b);
    }

    let mut rows = Vec::with_capacity(ts.len());
    let mut pass = true;
    for (k, &t) in ts.iter().enumerate() {
        let in_range = (n as u64) >= bounds[k].valid_from_n;
        let vacuous = bounds[k].value > 1.0;
        let row_pass = !in_range || vacuous || freq[k] + 3.0 * se[k] <= bounds[k].value;
        pass &= row_pass;
        rows.push(TailCheckRow {
            t,
            empirical: freq[k],
            se: se[k],
            bound: bounds[k].value,
            in_validity_range: in_range,
            pass: row_pass,
        });
    }

    Ok(TailVerification {
        estimate: TailEstimate {
            t: ts,
            freq,
            se,
            r,
            n,
            seed,
        },
        bounds,
        rows,
        pass,
    })
}

/// Log-log rate study: per-N error medians, the fitted OLS slope, and the
/// theoretical exponent it is checked against.
#[derive(Debug, Clone, Serialize)]
pub struct RateStudy {
    pub n_grid: Vec<usize>,
    pub h_values: Vec<f64>,
    /// Median over replications of the per-replication sup-grid error.
    pub median_errors: Vec<f64>,
    /// Full error distributions, `per_rep_errors[level][rep]`.
    pub per_rep_errors: Vec<Vec<f64>>,
    pub slope: f64,
    pub slope_se: f64,
    pub theoretical: f64,
    /// True when every error sat at numerical zero and the fit was skipped.
    pub exact: bool,
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn fit_rate_study(
    n_grid: Vec<usize>,
    h_values: Vec<f64>,
    per_rep_errors: Vec<Vec<f64>>,
    theoretical: f64,
) -> RateStudy {
    let median_errors: Vec<f64> = per_rep_errors.iter().map(|e| median(e)).collect();
    let exact = median_errors.iter().all(|&e| e < 1e-12);
    let (slope, slope_se) = if exact {
        (0.0, 0.0)
    } else {
        let xs: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = median_errors.iter().map(|&e| e.max(1e-300).ln()).collect();
        let (slope, intercept) = crate::estimators::ols_fit(&xs, &ys);
        let nf = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / nf;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let rss: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();
        let se = if xs.len() > 2 {
            (rss / (nf - 2.0) / sxx).sqrt()
        } else {
            f64::NAN
        };
        (slope, se)
    };
    RateStudy {
        n_grid,
        h_values,
        median_errors,
        per_rep_errors,
        slope,
        slope_se,
        theoretical,
        exact,
    }
}
