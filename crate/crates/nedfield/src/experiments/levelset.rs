//! Level-set rate study: plug-in estimation of `{f >= lambda}` for the
//! symmetric triangular density, with the offset and bandwidth schedules of
//! the two performance measures.

use serde::Serialize;

use super::{fit_rate_study, ExperimentError, RateStudy};
use crate::estimators::{
    kde, level_set_mask, rho_exponent_fit, Grid1, KernelSpec, LevelSetResult, RhoExponentFit,
};
use crate::parallel::run_reps;
use crate::rng;
use rand::Rng;

/// Triangular density `f(z) = (1 - |z|)+` with inverse-CDF sampling.
pub fn triangular_pdf(z: f64) -> f64 {
    (1.0 - z.abs()).max(0.0)
}

fn triangular_quantile(u: f64) -> f64 {
    if u < 0.5 {
        -1.0 + (2.0 * u).sqrt()
    } else {
        1.0 - (2.0 * (1.0 - u)).sqrt()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetStudyConfig {
    pub lambda: f64,
    /// Holder exponent of the density near the level.
    pub beta: f64,
    pub n_grid: Vec<usize>,
    /// Bandwidth scales: `h = c_h N^{-1/(2 beta + 1)}` for d_H and
    /// `h = c_h (N / log N)^{-1/(2 beta + 1)}` for d_delta.
    pub h_scale: f64,
    /// Offset scales: `l_N = c_l N^{-2 beta/(2 beta + 1)}`, times
    /// `sqrt(log N)` for d_delta.
    pub l_scale: f64,
    pub grid: Grid1,
    pub r: u64,
    pub seed: u64,
    pub threads: usize,
}

/// Paired rate studies for the two pseudo-distances, plus the rho-exponent
/// cross-check on the truth density.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSetStudy {
    pub d_h: RateStudy,
    pub d_delta: RateStudy,
    pub rho_fit: Option<RhoExponentFit>,
}

pub fn run_levelset_study(cfg: &LevelSetStudyConfig) -> Result<LevelSetStudy, ExperimentError> {
    let kernel = KernelSpec::epanechnikov();
    let grid_points = cfg.grid.points();
    let pitch = cfg.grid.pitch();
    let truth_density: Vec<f64> = grid_points.iter().map(|&z| triangular_pdf(z)).collect();
    let truth_mask = level_set_mask(&truth_density, cfg.lambda, 0.0);

    let d = 1.0;
    let exp_h = 1.0 / (2.0 * cfg.beta + d);
    let exp_l = 2.0 * cfg.beta / (2.0 * cfg.beta + d);

    let mut h_values = Vec::with_capacity(cfg.n_grid.len());
    let mut per_rep_h = Vec::with_capacity(cfg.n_grid.len());
    let mut per_rep_delta = Vec::with_capacity(cfg.n_grid.len());
    for (level, &n) in cfg.n_grid.iter().enumerate() {
        let nf = n as f64;
        let h_for_h = cfg.h_scale * nf.powf(-exp_h);
        let h_for_delta = cfg.h_scale * (nf / nf.ln()).powf(-exp_h);
        let l_for_h = cfg.l_scale * nf.powf(-exp_l);
        let l_for_delta = cfg.l_scale * nf.powf(-exp_l) * nf.ln().sqrt();
        h_values.push(h_for_h);

        let kernel = kernel.clone();
        let grid_points = grid_points.clone();
        let truth_density = truth_density.clone();
        let truth_mask = truth_mask.clone();
        let pairs: Vec<(f64, f64)> = run_reps(cfg.r, cfg.threads, |rep| {
            let mut stream = rng::stream(cfg.seed, (level as u64) << 32 | rep);
            let xs: Vec<f64> = (0..n)
                .map(|_| triangular_quantile(stream.gen::<f64>()))
                .collect();
            let fit_h = kde(&xs, 1, &kernel, h_for_h, &grid_points).expect("kde fit");
            let res_h = LevelSetResult::compare(
                &fit_h.values,
                cfg.lambda,
                l_for_h,
                &truth_mask,
                pitch,
                &truth_density,
                true,
            );
            let fit_d = kde(&xs, 1, &kernel, h_for_delta, &grid_points).expect("kde fit");
            let res_d = LevelSetResult::compare(
                &fit_d.values,
                cfg.lambda,
                l_for_delta,
                &truth_mask,
                pitch,
                &truth_density,
                true,
            );
            (res_h.d_h, res_d.d_delta)
        });
        per_rep_h.push(pairs.iter().map(|p| p.0).collect());
        per_rep_delta.push(pairs.iter().map(|p| p.1).collect());
    }

    // Theorem-8 exponents modulo logs: d_H at (1+rho) beta/(2 beta + D),
    // d_delta at rho beta/(2 beta + D), with rho read off the truth density.
    let eps: Vec<f64> = (1..=10).map(|k| 0.02 * k as f64).collect();
    let rho_fit = rho_exponent_fit(&truth_density, cfg.lambda, &eps, pitch)?;
    let rho = rho_fit.map(|f| f.rho).unwrap_or(1.0);
    let d_h_theory = -(1.0 + rho) * cfg.beta / (2.0 * cfg.beta + d);
    let d_delta_theory = -rho * cfg.beta / (2.0 * cfg.beta + d);

    Ok(LevelSetStudy {
        d_h: fit_rate_study(
            cfg.n_grid.clone(),
            h_values.clone(),
            per_rep_h,
            d_h_theory,
        ),
        d_delta: fit_rate_study(cfg.n_grid.clone(), h_values, per_rep_delta, d_delta_theory),
        rho_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        for &u in &[0.05, 0.3, 0.5, 0.7, 0.95] {
            let z = triangular_quantile(u);
            let cdf = if z < 0.0 {
                (1.0 + z) * (1.0 + z) / 2.0
            } else {
                1.0 - (1.0 - z) * (1.0 - z) / 2.0
            };
            assert!((cdf - u).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_density_gives_zero_distances() {
        // With f_hat = f and l_N = 0 both distances vanish: covered by the
        // estimator-level tests; here check the study plumbing end to end on
        // a tiny configuration.
        let study = run_levelset_study(&LevelSetStudyConfig {
            lambda: 0.5,
            beta: 1.0,
            n_grid: vec![512, 2048],
            h_scale: 1.0,
            l_scale: 1.0,
            grid: Grid1::new(-1.25, 1.25, 1001).unwrap(),
            r: 4,
            seed: 9,
            threads: 0,
        })
        .unwrap();
        assert_eq!(study.d_h.n_grid, vec![512, 2048]);
        let rho = study.rho_fit.unwrap();
        assert!((rho.rho - 1.0).abs() < 0.1);
        // Distances shrink with N in the median.
        assert!(study.d_h.median_errors[1] <= study.d_h.median_errors[0]);
        assert!(study.d_delta.median_errors[1] <= study.d_delta.median_errors[0] + 1e-9);
    }
}
