//! Plug-in density level sets with offset, the symmetric-difference
//! pseudo-distances, and the rho-exponent fit.
//!
//! Level sets live on grids with a known cell measure; Lebesgue measure is
//! approximated by cell counting with boundary cells assigned by center
//! membership (bias O(pitch * perimeter)).

use super::EstimatorError;

/// Plug-in level set `{f_hat >= lambda + l_n}` as a mask over the grid.
pub fn level_set_mask(values: &[f64], lambda: f64, l_n: f64) -> Vec<bool> {
    values.iter().map(|&v| v >= lambda + l_n).collect()
}

/// Level-set estimate with its performance measures against a reference.
#[derive(Debug, Clone)]
pub struct LevelSetResult {
    pub lambda: f64,
    pub offset: f64,
    pub mask: Vec<bool>,
    pub d_delta: f64,
    pub d_h: f64,
    /// True when `d_h` weighted by the true density rather than a plug-in.
    pub used_truth: bool,
}

impl LevelSetResult {
    /// Threshold the fitted density and measure both pseudo-distances
    /// against a reference mask. `weight_density` should be the truth when
    /// available (`used_truth`), else the plug-in values.
    pub fn compare(
        fitted_density: &[f64],
        lambda: f64,
        offset: f64,
        reference_mask: &[bool],
        cell_measure: f64,
        weight_density: &[f64],
        used_truth: bool,
    ) -> LevelSetResult {
        let mask = level_set_mask(fitted_density, lambda, offset);
        let (d_delta, d_h) =
            distances(&mask, reference_mask, cell_measure, weight_density, lambda);
        LevelSetResult {
            lambda,
            offset,
            mask,
            d_delta,
            d_h,
            used_truth,
        }
    }
}

/// `d_delta` = cell measure of the symmetric difference;
/// `d_h` = integral of `|f - lambda|` over the symmetric difference, with
/// `f` evaluated from `weight_density` (truth when available, else the
/// reference plug-in values).
pub fn distances(
    mask_a: &[bool],
    mask_b: &[bool],
    cell_measure: f64,
    weight_density: &[f64],
    lambda: f64,
) -> (f64, f64) {
    assert_eq!(mask_a.len(), mask_b.len());
    assert_eq!(mask_a.len(), weight_density.len());
    let mut d_delta = 0.0;
    let mut d_h = 0.0;
    for i in 0..mask_a.len() {
        if mask_a[i] != mask_b[i] {
            d_delta += cell_measure;
            d_h += cell_measure * (weight_density[i] - lambda).abs();
        }
    }
    (d_delta, d_h)
}

/// Fitted rho-exponent: `mu{0 < |f - lambda| <= eps} ~ c0 eps^rho`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RhoExponentFit {
    pub rho: f64,
    pub c0: f64,
}

/// Tabulate the near-level measure by grid quadrature over `eps_grid` and
/// fit log-measure against log-eps by least squares. Returns `None` when the
/// measures are degenerate (fewer than two positive values).
pub fn rho_exponent_fit(
    density: &[f64],
    lambda: f64,
    eps_grid: &[f64],
    cell_measure: f64,
) -> Result<Option<RhoExponentFit>, EstimatorError> {
    if eps_grid.iter().any(|&e| e <= 0.0) {
        return Err(EstimatorError::BadParameter(
            "epsilon grid must be strictly positive".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &eps in eps_grid {
        let measure: f64 = density
            .iter()
            .filter(|&&f| {
                let gap = (f - lambda).abs();
                gap > 0.0 && gap <= eps
            })
            .count() as f64
            * cell_measure;
        if measure > 0.0 {
            xs.push(eps.ln());
            ys.push(measure.ln());
        }
    }
    if xs.len() < 2 {
        return Ok(None);
    }
    let (slope, intercept) = super::ols_fit(&xs, &ys);
    Ok(Some(RhoExponentFit {
        rho: slope,
        c0: intercept.exp(),
    }))
}
