//! Convergence-rate slope studies for the kernel estimators.
//!
//! Each study draws fresh samples per replication, records the sup-grid
//! error against the known truth, and fits the log-log slope of the median
//! error over a dyadic N grid. Bandwidth schedules follow the rate-optimal
//! form for each estimator; slope tolerances live with the callers because
//! the rates carry log factors.

use serde::Serialize;

use super::{fit_rate_study, ExperimentError, RateStudy};
use crate::estimators::{kde, local_linear, modal_regression, slpde, Grid1, KernelSpec};
use crate::fields::{sample_locations, CovariateDesign, LocationScheme, Marginal, TruthFn};
use crate::parallel::run_reps;
use crate::rng;
use rand::Rng;

use std::sync::Arc;

/// Local linear rate study under `h = c (log N / N)^{1/(2 beta + 1)}`.
#[derive(Debug, Clone, Serialize)]
pub struct LoclinStudyConfig {
    pub truth: TruthFn,
    pub noise_sd: f64,
    /// Holder exponent of the truth.
    pub beta: f64,
    pub n_grid: Vec<usize>,
    pub h_scale: f64,
    pub r: u64,
    pub seed: u64,
    pub threads: usize,
}

pub fn run_loclin_rate_study(cfg: &LoclinStudyConfig) -> Result<RateStudy, ExperimentError> {
    let kernel = KernelSpec::epanechnikov();
    let eval = Grid1::new(0.1, 0.9, 64)?.points();
    let mut h_values = Vec::with_capacity(cfg.n_grid.len());
    let mut per_rep = Vec::with_capacity(cfg.n_grid.len());
    for (level, &n) in cfg.n_grid.iter().enumerate() {
        let nf = n as f64;
        let h = cfg.h_scale * (nf.ln() / nf).powf(1.0 / (2.0 * cfg.beta + 1.0));
        h_values.push(h);
        let ls = Arc::new(sample_locations(
            &LocationScheme::JitteredGrid {
                d: 1,
                n,
                pitch: 1.0,
                jitter: 0.2,
                d0: 0.5,
                h0: 2.0,
            },
            cfg.seed ^ (level as u64) << 32,
        )?);
        let truth = cfg.truth;
        let noise_sd = cfg.noise_sd;
        let kernel = kernel.clone();
        let eval = eval.clone();
        let errors: Vec<f64> = run_reps(cfg.r, cfg.threads, |rep| {
            let sample = crate::fields::sample_regression(
                &ls,
                &CovariateDesign::Iid { lo: 0.0, hi: 1.0 },
                truth,
                TruthFn::Const { c: noise_sd },
                Marginal::Gaussian { sd: 1.0 },
                cfg.seed,
                (level as u64) << 32 | rep,
            )
            .expect("regression sampling");
            let fit = local_linear(&sample.x, 1, &sample.y, &kernel, h, &eval)
                .expect("local linear fit");
            eval.iter()
                .zip(&fit.values)
                .filter(|(_, v)| v.is_finite())
                .map(|(x, v)| (v - truth.eval(*x)).abs())
                .fold(0.0f64, f64::max)
        });
        per_rep.push(errors);
    }
    let theoretical = -cfg.beta / (2.0 * cfg.beta + 1.0);
    Ok(fit_rate_study(
        cfg.n_grid.clone(),
        h_values,
        per_rep,
        theoretical,
    ))
}

/// SLPDE density rate study on uniform[0, 1] data with
/// `h = c (log N / N)^{1/(2p + 3)}`.
#[derive(Debug, Clone, Serialize)]
pub struct SlpdeStudyConfig {
    pub order: usize,
    pub n_grid: Vec<usize>,
    pub h_scale: f64,
    pub r: u64,
    pub seed: u64,
    pub threads: usize,
}

pub fn run_slpde_rate_study(cfg: &SlpdeStudyConfig) -> Result<RateStudy, ExperimentError> {
    let kernel = KernelSpec::epanechnikov();
    let eval = Grid1::new(0.05, 0.95, 64)?.points();
    let p = cfg.order as f64;
    let mut h_values = Vec::with_capacity(cfg.n_grid.len());
    let mut per_rep = Vec::with_capacity(cfg.n_grid.len());
    for (level, &n) in cfg.n_grid.iter().enumerate() {
        let nf = n as f64;
        let h = cfg.h_scale * (nf.ln() / nf).powf(1.0 / (2.0 * p + 3.0));
        h_values.push(h);
        let kernel = kernel.clone();
        let eval = eval.clone();
        let errors: Vec<f64> = run_reps(cfg.r, cfg.threads, |rep| {
            let mut stream = rng::stream(cfg.seed, (level as u64) << 32 | rep);
            let xs: Vec<f64> = (0..n).map(|_| stream.gen::<f64>()).collect();
            let fit = slpde(&xs, &kernel, h, cfg.order, &eval).expect("slpde fit");
            fit.density()
                .iter()
                .filter(|v| v.is_finite())
                .map(|v| (v - 1.0).abs())
                .fold(0.0f64, f64::max)
        });
        per_rep.push(errors);
    }
    // Slope of the theoretical envelope sqrt(log N/(N h^3)) + h^p at the
    // realized schedule.
    let xs: Vec<f64> = cfg.n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = cfg
        .n_grid
        .iter()
        .zip(&h_values)
        .map(|(&n, &h)| {
            let nf = n as f64;
            ((nf.ln() / (nf * h.powi(3))).sqrt() + h.powf(p)).ln()
        })
        .collect();
    let (theoretical, _) = crate::estimators::ols_fit(&xs, &ys);
    Ok(fit_rate_study(
        cfg.n_grid.clone(),
        h_values,
        per_rep,
        theoretical,
    ))
}

/// Paired SLPDE-vs-KDE boundary comparison on uniform[0, 1] data.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryComparison {
    pub n: usize,
    pub h: f64,
    pub r: u64,
    /// Mean absolute density error at the boundary points {0, 1}, per rep.
    pub slpde_errors: Vec<f64>,
    pub kde_errors: Vec<f64>,
    /// Fraction of replications where SLPDE beat KDE strictly.
    pub slpde_win_fraction: f64,
}

pub fn run_boundary_comparison(
    n: usize,
    order: usize,
    h: f64,
    r: u64,
    seed: u64,
    threads: usize,
) -> Result<BoundaryComparison, ExperimentError> {
    let kernel = KernelSpec::epanechnikov();
    let boundary = [0.0, 1.0];
    let pairs: Vec<(f64, f64)> = run_reps(r, threads, |rep| {
        let mut stream = rng::stream(seed, rep);
        let xs: Vec<f64> = (0..n).map(|_| stream.gen::<f64>()).collect();
        let sl = slpde(&xs, &kernel, h, order, &boundary).expect("slpde fit");
        let kd = kde(&xs, 1, &kernel, h, &boundary).expect("kde fit");
        let sl_err = sl
            .density()
            .iter()
            .map(|v| (v - 1.0).abs())
            .sum::<f64>()
            / 2.0;
        let kd_err = kd.values.iter().map(|v| (v - 1.0).abs()).sum::<f64>() / 2.0;
        (sl_err, kd_err)
    });
    let wins = pairs.iter().filter(|(s, k)| s < k).count();
    Ok(BoundaryComparison {
        n,
        h,
        r,
        slpde_errors: pairs.iter().map(|p| p.0).collect(),
        kde_errors: pairs.iter().map(|p| p.1).collect(),
        slpde_win_fraction: wins as f64 / r as f64,
    })
}

/// Modal regression rate study with `h = c (log N / N)^{1/(2 alpha + 2)}`
/// (D = 1), sine truth and triangular noise.
#[derive(Debug, Clone, Serialize)]
pub struct ModalStudyConfig {
    /// Holder exponent of the joint density.
    pub alpha: f64,
    pub noise_half_width: f64,
    pub n_grid: Vec<usize>,
    pub h_scale: f64,
    pub r: u64,
    pub seed: u64,
    pub threads: usize,
}

pub fn run_modal_rate_study(cfg: &ModalStudyConfig) -> Result<RateStudy, ExperimentError> {
    let kernel = KernelSpec::epanechnikov();
    let x_grid = Grid1::new(0.15, 0.85, 29)?.points();
    let y_grid = Grid1::new(-1.6, 1.6, 321)?.points();
    let truth = |x: f64| (std::f64::consts::PI * x).sin();
    let mut h_values = Vec::with_capacity(cfg.n_grid.len());
    let mut per_rep = Vec::with_capacity(cfg.n_grid.len());
    for (level, &n) in cfg.n_grid.iter().enumerate() {
        let nf = n as f64;
        let h = cfg.h_scale * (nf.ln() / nf).powf(1.0 / (2.0 * cfg.alpha + 2.0));
        h_values.push(h);
        let kernel = kernel.clone();
        let x_grid = x_grid.clone();
        let y_grid = y_grid.clone();
        let errors: Vec<f64> = run_reps(cfg.r, cfg.threads, |rep| {
            let mut stream = rng::stream(cfg.seed, (level as u64) << 32 | rep);
            let mut x = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let xi: f64 = stream.gen();
                let e = (stream.gen::<f64>() + stream.gen::<f64>() - 1.0) * cfg.noise_half_width;
                x.push(xi);
                y.push(truth(xi) + e);
            }
            let out = modal_regression(
                &x,
                1,
                &y,
                &kernel,
                &kernel,
                h,
                &x_grid,
                &y_grid,
                1e-9,
            )
            .expect("modal fit");
            x_grid
                .iter()
                .zip(&out)
                .filter_map(|(xg, yh)| yh.map(|v| (v - truth(*xg)).abs()))
                .fold(0.0f64, f64::max)
        });
        per_rep.push(errors);
    }
    let theoretical = -cfg.alpha / (2.0 * cfg.alpha + 2.0);
    Ok(fit_rate_study(
        cfg.n_grid.clone(),
        h_values,
        per_rep,
        theoretical,
    ))
}
