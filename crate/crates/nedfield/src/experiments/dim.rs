//! Effective-dimension comparison: line layouts against full grids, and the
//! bound magnitudes the detected dimension implies.

use serde::Serialize;

use super::ExperimentError;
use crate::bounds::{bound_corollary1, DependenceParams, GeometryParams};
use crate::fields::{sample_locations, LocationScheme};
use crate::geometry::effective_dimension;

#[derive(Debug, Clone, Serialize)]
pub struct DimStudy {
    pub line_d2: usize,
    pub grid_d2: usize,
    pub bound_line: f64,
    pub bound_grid: f64,
    /// Line-layout bound strictly below the grid-layout bound at matched
    /// parameters.
    pub pass: bool,
}

/// Detect d2 for the figure-1 line layout (m0 = 3) and a full 2D grid
/// (m0 = 1), then evaluate the mixing bound at matched `(N, t)` with each
/// detected dimension.
pub fn run_effective_dimension_study(
    n_points: usize,
    dep: &DependenceParams,
    h0: f64,
    d0: f64,
    bound_n: u64,
    bound_t: f64,
    seed: u64,
) -> Result<DimStudy, ExperimentError> {
    let lines = sample_locations(
        &LocationScheme::Figure1Lines {
            n: n_points,
            pitch: 1.0,
            jitter: 0.15,
            d0,
            h0,
        },
        seed,
    )?;
    let line_cover = effective_dimension(&lines, 3, h0, false)?;

    let side = (n_points as f64).sqrt().ceil() as usize;
    let grid = sample_locations(
        &LocationScheme::JitteredGrid {
            d: 2,
            n: side * side,
            pitch: 1.0,
            jitter: 0.15,
            d0,
            h0: 2.0 * 2f64.sqrt() * h0,
        },
        seed ^ 0x5eed,
    )?;
    let grid_cover = effective_dimension(&grid, 1, h0, false)?;

    let geo_line = GeometryParams::new(2, 2 - line_cover.d2.max(1), h0, d0)?;
    let geo_grid = GeometryParams::new(2, 2 - grid_cover.d2.max(1), h0, d0)?;
    let bound_line = bound_corollary1(dep, &geo_line, bound_n, bound_t)?.value;
    let bound_grid = bound_corollary1(dep, &geo_grid, bound_n, bound_t)?.value;

    Ok(DimStudy {
        line_d2: line_cover.d2,
        grid_d2: grid_cover.d2,
        bound_line,
        bound_grid,
        pass: line_cover.d2 == 1 && grid_cover.d2 == 2 && bound_line < bound_grid,
    })
}
