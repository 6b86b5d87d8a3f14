//! Irregular location sets and the blocking machinery built on top of them.
//!
//! A [`LocationSet`] is a finite set of points in `R^d` with a certified
//! minimum pairwise separation. [`effective_dimension`] covers the set with
//! axis-aligned rectangles and classifies each rectangle edge as bounded or
//! unbounded; the maximum unbounded-edge count over the cover is the
//! effective dimension `d2`. [`build_blocking`] and
//! [`build_algebraic_blocking`] partition a single-rectangle cover into the
//! cube grid / residue groups and the `2^{d2}`-group rectangle partition used
//! by the tail-bound arguments.
//!
//! All operations here are pure: geometry never consumes randomness.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("location set must contain at least one point")]
    Empty,
    #[error("coordinate buffer length {len} is not a multiple of dim {dim}")]
    RaggedCoordinates { len: usize, dim: usize },
    #[error("dim must be positive")]
    ZeroDim,
    #[error("min separation certificate {min_sep} violated: pair ({i}, {j}) at distance {dist}")]
    SeparationViolated {
        i: usize,
        j: usize,
        dist: f64,
        min_sep: f64,
    },
    #[error("cluster {cluster} has axis {axis} extent {extent} in the ambiguous band ({h0}, {high}) under strict mode")]
    AmbiguousAxis {
        cluster: usize,
        axis: usize,
        extent: f64,
        h0: f64,
        high: f64,
    },
    #[error("blocking requires a single-rectangle cover, got {0} rectangles")]
    MultiRectangleCover(usize),
    #[error("cube {cube} holds {count} points, exceeding the capacity C0 = {c0}; this signals a min-separation violation")]
    CubeOverflow { cube: usize, count: usize, c0: f64 },
    #[error("spacing must be at least 1")]
    ZeroSpacing,
    #[error("q = {q} out of range: need 1 <= q <= N_hat/2 = {limit}")]
    QOutOfRange { q: usize, limit: f64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// N points in `R^d` with a certified minimum pairwise Euclidean separation.
///
/// Construction verifies the certificate: every pairwise distance strictly
/// exceeds `min_sep`.
#[derive(Debug, Clone)]
pub struct LocationSet {
    dim: usize,
    coords: Vec<f64>,
    min_sep: f64,
}

impl LocationSet {
    pub fn new(dim: usize, coords: Vec<f64>, min_sep: f64) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDim);
        }
        if coords.is_empty() {
            return Err(GeometryError::Empty);
        }
        if coords.len() % dim != 0 {
            return Err(GeometryError::RaggedCoordinates {
                len: coords.len(),
                dim,
            });
        }
        let ls = LocationSet {
            dim,
            coords,
            min_sep,
        };
        let report = validate_min_separation(&ls, min_sep);
        if !report.pass {
            let (i, j) = report.closest_pair.unwrap_or((0, 0));
            return Err(GeometryError::SeparationViolated {
                i,
                j,
                dist: report.min_distance,
                min_sep,
            });
        }
        Ok(ls)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn min_sep(&self) -> f64 {
        self.min_sep
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Upper bound on the diameter: per-axis extents combined by Pythagoras.
    /// Exact for sets whose extreme points sit in opposite corners.
    pub fn diameter_upper_bound(&self) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dim {
            let (lo, hi) = self.axis_range(k);
            acc += (hi - lo) * (hi - lo);
        }
        acc.sqrt()
    }

    pub fn axis_range(&self, axis: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.points() {
            lo = lo.min(p[axis]);
            hi = hi.max(p[axis]);
        }
        (lo, hi)
    }

    /// Serialize as `id,x1,...,xd` rows (header included).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for k in 1..=self.dim {
            out.push_str(&format!(",x{k}"));
        }
        out.push('\n');
        for (i, p) in self.points().enumerate() {
            out.push_str(&i.to_string());
            for v in p {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the `to_csv` format; `#`-prefixed comment lines are skipped.
    pub fn from_csv(text: &str, min_sep: f64) -> Result<Self, GeometryError> {
        let mut dim = 0usize;
        let mut coords = Vec::new();
        let mut saw_header = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                dim = line.split(',').count().saturating_sub(1);
                saw_header = true;
                continue;
            }
            for (k, field) in line.split(',').enumerate() {
                if k == 0 {
                    continue;
                }
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| GeometryError::BadParameter(format!("bad coordinate {field}")))?;
                coords.push(v);
            }
        }
        LocationSet::new(dim, coords, min_sep)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Result of checking a separation certificate `d0` against a set.
///
/// A violation is a valid report, not an error.
#[derive(Debug, Clone)]
pub struct SeparationReport {
    /// Exact minimum pairwise Euclidean distance (infinite for N = 1).
    pub min_distance: f64,
    pub closest_pair: Option<(usize, usize)>,
    /// True iff `min_distance > d0` strictly.
    pub pass: bool,
}

/// Exact closest-pair scan: sort by the widest axis, then sweep with pruning
/// on that axis. Worst case O(N^2), near-linear on spread-out sets.
pub fn validate_min_separation(ls: &LocationSet, d0: f64) -> SeparationReport {
    let n = ls.len();
    if n < 2 {
        return SeparationReport {
            min_distance: f64::INFINITY,
            closest_pair: None,
            pass: true,
        };
    }
    let axis = (0..ls.dim())
        .max_by(|&a, &b| {
            let (la, ha) = ls.axis_range(a);
            let (lb, hb) = ls.axis_range(b);
            (ha - la).partial_cmp(&(hb - lb)).unwrap()
        })
        .unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| ls.point(i)[axis].partial_cmp(&ls.point(j)[axis]).unwrap());

    let mut best = f64::INFINITY;
    let mut pair = (0, 0);
    for a in 0..n {
        let i = order[a];
        let xi = ls.point(i)[axis];
        for &j in order.iter().skip(a + 1) {
            let dx = ls.point(j)[axis] - xi;
            if dx * dx >= best {
                break;
            }
            let d2 = dist2(ls.point(i), ls.point(j));
            if d2 < best {
                best = d2;
                pair = (i.min(j), i.max(j));
            }
        }
    }
    let min_distance = best.sqrt();
    SeparationReport {
        min_distance,
        closest_pair: Some(pair),
        pass: min_distance > d0,
    }
}

/// Number of points of `ls` inside the closed axis-aligned cube centered at
/// `center` with edge length `side`.
pub fn count_in_cube(ls: &LocationSet, center: &[f64], side: f64) -> usize {
    assert!(side > 0.0, "cube side must be positive");
    let half = side / 2.0;
    ls.points()
        .filter(|p| p.iter().zip(center).all(|(x, c)| (x - c).abs() <= half))
        .count()
}

/// Floor with a relative tolerance, so ratios that are integers up to
/// floating-point rounding floor to the intended integer.
pub(crate) fn floor_tol(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-9 * x.abs().max(1.0) {
        x.round()
    } else {
        x.floor()
    }
}

/// Cube capacity `C0 = ([H0 / (sqrt(2) d0 / 2)] + 1)^d`.
pub fn cube_capacity(h0: f64, d0: f64, d: usize) -> f64 {
    let ratio = h0 / (std::f64::consts::SQRT_2 * d0 / 2.0);
    (floor_tol(ratio) + 1.0).powi(d as i32)
}

/// Unit-capacity check behind Proposition 1(i): a closed cube of edge
/// `sqrt(2) d0 / 2` holds two points iff their sup-norm distance is at most
/// that edge, so it suffices to scan pairs in the sup norm. The scan sorts
/// by one axis and prunes on it, since a sup-norm violation needs every
/// coordinate gap within the edge.
pub fn unit_capacity_holds(ls: &LocationSet, d0: f64) -> bool {
    let edge = std::f64::consts::SQRT_2 * d0 / 2.0;
    let n = ls.len();
    if n < 2 {
        return true;
    }
    let axis = 0usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| ls.point(i)[axis].partial_cmp(&ls.point(j)[axis]).unwrap());
    for a in 0..n {
        let i = order[a];
        let xi = ls.point(i)[axis];
        for &j in order.iter().skip(a + 1) {
            if ls.point(j)[axis] - xi > edge {
                break;
            }
            let linf = ls
                .point(i)
                .iter()
                .zip(ls.point(j))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            if linf <= edge {
                return false;
            }
        }
    }
    true
}

/// One axis-aligned closed box of the cover.
#[derive(Debug, Clone)]
pub struct Rectangle {
    /// Per-axis closed interval `[lo, hi]`.
    pub intervals: Vec<(f64, f64)>,
    /// True where the edge was classified bounded (extent <= H0).
    pub bounded: Vec<bool>,
}

impl Rectangle {
    pub fn contains(&self, p: &[f64]) -> bool {
        self.intervals
            .iter()
            .zip(p)
            .all(|(&(lo, hi), &x)| x >= lo && x <= hi)
    }

    pub fn edge_length(&self, axis: usize) -> f64 {
        let (lo, hi) = self.intervals[axis];
        hi - lo
    }

    pub fn unbounded_axes(&self) -> impl Iterator<Item = usize> + '_ {
        self.bounded
            .iter()
            .enumerate()
            .filter(|(_, b)| !**b)
            .map(|(k, _)| k)
    }
}

/// Rectangle cover with effective-dimension metadata.
#[derive(Debug, Clone)]
pub struct RectangleCover {
    pub rectangles: Vec<Rectangle>,
    pub d1_per_rect: Vec<usize>,
    /// Effective dimension: max unbounded-edge count over the cover.
    pub d2: usize,
    pub h0: f64,
    /// Which rectangle each point was assigned to.
    pub assignment: Vec<usize>,
}

impl RectangleCover {
    /// Structured text block: one line per rectangle with interval list.
    pub fn to_text(&self) -> String {
        let mut out = format!("d2={} h0={:.17e}\n", self.d2, self.h0);
        for (r, rect) in self.rectangles.iter().enumerate() {
            out.push_str(&format!("rect {r} d1={}", self.d1_per_rect[r]));
            for (k, &(lo, hi)) in rect.intervals.iter().enumerate() {
                let tag = if rect.bounded[k] { "b" } else { "u" };
                out.push_str(&format!(" [{lo:.17e},{hi:.17e}]{tag}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Deterministic farthest-point seeding: first center is the point farthest
/// from the centroid, later centers maximize the min distance to chosen
/// centers; ties break to the lowest point index.
fn farthest_point_centers(ls: &LocationSet, k: usize) -> Vec<usize> {
    let n = ls.len();
    let d = ls.dim();
    let mut centroid = vec![0.0; d];
    for p in ls.points() {
        for (c, x) in centroid.iter_mut().zip(p) {
            *c += x;
        }
    }
    for c in centroid.iter_mut() {
        *c /= n as f64;
    }
    let first = (0..n)
        .max_by(|&i, &j| {
            dist2(ls.point(i), &centroid)
                .partial_cmp(&dist2(ls.point(j), &centroid))
                .unwrap()
                .then(j.cmp(&i))
        })
        .unwrap();
    let mut centers = vec![first];
    let mut min_d2: Vec<f64> = (0..n).map(|i| dist2(ls.point(i), ls.point(first))).collect();
    while centers.len() < k.min(n) {
        let next = (0..n)
            .max_by(|&i, &j| min_d2[i].partial_cmp(&min_d2[j]).unwrap().then(j.cmp(&i)))
            .unwrap();
        centers.push(next);
        for i in 0..n {
            min_d2[i] = min_d2[i].min(dist2(ls.point(i), ls.point(next)));
        }
    }
    centers
}

/// Cover the set with at most `m0` axis-aligned rectangles and classify each
/// axis as bounded (cluster extent <= `h0`) or unbounded. Returns the cover
/// with `d2` set to the maximum unbounded count.
///
/// Bounded classification on a finite sample is a heuristic for the
/// asymptotic statement; `strict` turns extents inside `(h0, 2 h0)` into an
/// ambiguity error instead of silently classifying them unbounded.
pub fn effective_dimension(
    ls: &LocationSet,
    m0: usize,
    h0: f64,
    strict: bool,
) -> Result<RectangleCover, GeometryError> {
    if m0 == 0 {
        return Err(GeometryError::BadParameter("m0 must be at least 1".into()));
    }
    if h0 < 1.0 {
        return Err(GeometryError::BadParameter(format!(
            "H0 must be at least 1, got {h0}"
        )));
    }
    let d = ls.dim();
    let centers = farthest_point_centers(ls, m0);
    let mut assignment = vec![0usize; ls.len()];
    for (i, p) in ls.points().enumerate() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, &ci) in centers.iter().enumerate() {
            let dd = dist2(p, ls.point(ci));
            if dd < best_d {
                best_d = dd;
                best = c;
            }
        }
        assignment[i] = best;
    }

    let mut rectangles = Vec::new();
    let mut d1_per_rect = Vec::new();
    let mut d2 = 0usize;
    for c in 0..centers.len() {
        let members: Vec<usize> = (0..ls.len()).filter(|&i| assignment[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &members {
            for (k, &x) in ls.point(i).iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        let mut bounded = vec![false; d];
        let mut intervals = Vec::with_capacity(d);
        let mut d1 = 0usize;
        for k in 0..d {
            let extent = hi[k] - lo[k];
            if strict && extent > h0 && extent < 2.0 * h0 {
                return Err(GeometryError::AmbiguousAxis {
                    cluster: c,
                    axis: k,
                    extent,
                    h0,
                    high: 2.0 * h0,
                });
            }
            if extent <= h0 {
                bounded[k] = true;
                d1 += 1;
                // Bounded edges are widened to the common length H0.
                let mid = (lo[k] + hi[k]) / 2.0;
                intervals.push((mid - h0 / 2.0, mid + h0 / 2.0));
            } else {
                intervals.push((lo[k], hi[k]));
            }
        }
        d2 = d2.max(d - d1);
        // Remap rectangle ids so assignment indexes into `rectangles`.
        let rid = rectangles.len();
        for &i in &members {
            assignment[i] = rid;
        }
        rectangles.push(Rectangle { intervals, bounded });
        d1_per_rect.push(d1);
    }
    Ok(RectangleCover {
        rectangles,
        d1_per_rect,
        d2,
        h0,
        assignment,
    })
}

/// Cube-grid blocking of a single-rectangle cover, with residue-class index
/// groups along the unbounded axes.
#[derive(Debug, Clone)]
pub struct BlockingPlan {
    pub cube_side: f64,
    /// Lattice size per unbounded axis (`m_k`).
    pub lattice_dims: Vec<usize>,
    /// Flattened lattice cube id per point.
    pub cube_index_of_point: Vec<usize>,
    /// Points per cube (only nonempty cubes are listed).
    pub cube_counts: Vec<(usize, usize)>,
    /// One group per residue vector in `[0, P)^{d2}`; each group lists
    /// nonempty cube ids.
    pub groups: Vec<Vec<usize>>,
    pub spacing: usize,
    /// Product of unbounded edge lengths.
    pub n_hat: f64,
    pub c0: f64,
}

impl BlockingPlan {
    pub fn lattice_coords(&self, cube: usize) -> Vec<usize> {
        let mut rem = cube;
        let mut coords = vec![0usize; self.lattice_dims.len()];
        for (k, &m) in self.lattice_dims.iter().enumerate().rev() {
            coords[k] = rem % m;
            rem /= m;
        }
        coords
    }
}

/// Build the cube grid of side `H0` tiling the rectangle and group the cubes
/// by residue classes modulo `P` along the unbounded axes.
///
/// Fails if any cube holds more than `C0` points, which signals a violated
/// min-separation certificate.
pub fn build_blocking(
    ls: &LocationSet,
    cover: &RectangleCover,
    spacing: usize,
) -> Result<BlockingPlan, GeometryError> {
    if spacing == 0 {
        return Err(GeometryError::ZeroSpacing);
    }
    if cover.rectangles.len() != 1 {
        return Err(GeometryError::MultiRectangleCover(cover.rectangles.len()));
    }
    let rect = &cover.rectangles[0];
    let h0 = cover.h0;
    let unbounded: Vec<usize> = rect.unbounded_axes().collect();
    let d2 = unbounded.len();

    // m_k = H_k/H0 when that is an integer, otherwise floor + 1.
    let mut lattice_dims = Vec::with_capacity(d2);
    let mut n_hat = 1.0f64;
    for &k in &unbounded {
        let len = rect.edge_length(k);
        n_hat *= len;
        let ratio = len / h0;
        let m = if (ratio - ratio.round()).abs() < 1e-12 && ratio.round() >= 1.0 {
            ratio.round() as usize
        } else {
            ratio.floor() as usize + 1
        };
        lattice_dims.push(m.max(1));
    }

    let total_cubes: usize = lattice_dims.iter().product::<usize>().max(1);
    let mut cube_index_of_point = Vec::with_capacity(ls.len());
    let mut counts = vec![0usize; total_cubes];
    for p in ls.points() {
        let mut idx = 0usize;
        for (pos, &k) in unbounded.iter().enumerate() {
            let (lo, _) = rect.intervals[k];
            let mut cell = ((p[k] - lo) / h0).floor() as isize;
            if cell < 0 {
                cell = 0;
            }
            let cell = (cell as usize).min(lattice_dims[pos] - 1);
            idx = idx * lattice_dims[pos] + cell;
        }
        cube_index_of_point.push(idx);
        counts[idx] += 1;
    }

    let c0 = cube_capacity(h0, ls.min_sep(), ls.dim());
    for (cube, &count) in counts.iter().enumerate() {
        if (count as f64) > c0 {
            return Err(GeometryError::CubeOverflow { cube, count, c0 });
        }
    }

    // Residue groups: cube -> (lattice coords mod P) per unbounded axis.
    let p = spacing;
    let group_count = p.pow(d2 as u32).max(1);
    let mut groups = vec![Vec::new(); group_count];
    for (cube, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let mut rem = cube;
        let mut coords = vec![0usize; d2];
        for (k, &m) in lattice_dims.iter().enumerate().rev() {
            coords[k] = rem % m;
            rem /= m;
        }
        let mut g = 0usize;
        for &c in &coords {
            g = g * p + (c % p);
        }
        groups[g].push(cube);
    }

    let cube_counts = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, c))
        .collect();

    Ok(BlockingPlan {
        cube_side: h0,
        lattice_dims,
        cube_index_of_point,
        cube_counts,
        groups,
        spacing,
        n_hat,
        c0,
    })
}

/// The paper's spacing choice `P = 3 ((2(kappa+beta)+tau+1) log_nu N_hat / b)^{1/gamma}`,
/// rounded up to an integer (at least 1).
pub fn paper_spacing(
    kappa: f64,
    beta: f64,
    tau: f64,
    b: f64,
    gamma: f64,
    nu: f64,
    n_hat: f64,
) -> usize {
    let log_nu = n_hat.ln() / nu.ln();
    if log_nu <= 0.0 {
        return 1;
    }
    let p = 3.0 * ((2.0 * (kappa + beta) + tau + 1.0) * log_nu / b).powf(1.0 / gamma);
    p.ceil().max(1.0) as usize
}

/// `2^{d2}`-group rectangle partition used in the algebraic-NED bound: each
/// unbounded edge splits into `2q` pieces of length `H_k/(2q)`, alternating
/// between groups along every axis.
#[derive(Debug, Clone)]
pub struct AlgebraicBlocking {
    /// Per-axis sub-interval length `p_k = H_k / (2q)` (unbounded axes only).
    pub piece_lengths: Vec<f64>,
    /// Group id per point in `[0, 2^{d2})`.
    pub group_of_point: Vec<usize>,
    /// Cell id (flattened over all `(2q)^{d2}` sub-rectangles) per point.
    pub cell_of_point: Vec<usize>,
    /// Point count per cell.
    pub cell_counts: Vec<usize>,
    pub q: usize,
    /// Capacity `C_p = C0 * prod([p_k/H0] + 1)`.
    pub c_p: f64,
}

pub fn build_algebraic_blocking(
    ls: &LocationSet,
    cover: &RectangleCover,
    q: usize,
) -> Result<AlgebraicBlocking, GeometryError> {
    if cover.rectangles.len() != 1 {
        return Err(GeometryError::MultiRectangleCover(cover.rectangles.len()));
    }
    let rect = &cover.rectangles[0];
    let unbounded: Vec<usize> = rect.unbounded_axes().collect();
    let d2 = unbounded.len();
    let n_hat: f64 = unbounded.iter().map(|&k| rect.edge_length(k)).product();
    if q == 0 || (q as f64) > n_hat / 2.0 {
        return Err(GeometryError::QOutOfRange {
            q,
            limit: n_hat / 2.0,
        });
    }

    let piece_lengths: Vec<f64> = unbounded
        .iter()
        .map(|&k| rect.edge_length(k) / (2.0 * q as f64))
        .collect();
    let cells_per_axis = 2 * q;
    let total_cells = cells_per_axis.pow(d2 as u32).max(1);
    let mut group_of_point = Vec::with_capacity(ls.len());
    let mut cell_of_point = Vec::with_capacity(ls.len());
    let mut cell_counts = vec![0usize; total_cells];
    for p in ls.points() {
        let mut cell = 0usize;
        let mut group = 0usize;
        for (pos, &k) in unbounded.iter().enumerate() {
            let (lo, _) = rect.intervals[k];
            let mut c = ((p[k] - lo) / piece_lengths[pos]).floor() as isize;
            if c < 0 {
                c = 0;
            }
            let c = (c as usize).min(cells_per_axis - 1);
            cell = cell * cells_per_axis + c;
            group = group * 2 + (c % 2);
        }
        cell_of_point.push(cell);
        group_of_point.push(group);
        cell_counts[cell] += 1;
    }

    let c0 = cube_capacity(cover.h0, ls.min_sep(), ls.dim());
    let c_p = c0
        * piece_lengths
            .iter()
            .map(|&pk| (pk / cover.h0).floor() + 1.0)
            .product::<f64>();
    for (cell, &count) in cell_counts.iter().enumerate() {
        if (count as f64) > c_p {
            return Err(GeometryError::CubeOverflow {
                cube: cell,
                count,
                c0: c_p,
            });
        }
    }

    Ok(AlgebraicBlocking {
        piece_lengths,
        group_of_point,
        cell_of_point,
        cell_counts,
        q,
        c_p,
    })
}
