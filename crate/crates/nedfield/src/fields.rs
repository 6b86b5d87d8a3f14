//! Random-field generators over a [`LocationSet`]: alpha-mixing innovation
//! fields, NED moving-average fields with truncated projections, location
//! samplers, and regression samplers.
//!
//! Generation is deterministic given `(spec, seed)`: every replication draws
//! from its own derived stream, and the per-point evaluation order is fixed.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{euclidean, LocationSet};
use crate::rng;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("geometry error: {0}")]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error("degenerate field: weights at available neighbors sum to {0}, below the floor")]
    DegenerateWeights(f64),
    #[error("hardcore sampler failed after {rounds} rejection rounds; intensity infeasible for d0 = {d0}")]
    HardcoreInfeasible { rounds: usize, d0: f64 },
    #[error("Assumption 4 violated: diameter bound {diameter} exceeds (H0/2) N^(1/d2) = {limit}")]
    Assumption4 { diameter: f64, limit: f64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Bounded or unbounded marginal for innovation atoms and noise.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Marginal {
    /// Uniform on `[-a, a]`.
    Uniform { a: f64 },
    /// +m or -m with equal probability.
    Rademacher { m: f64 },
    /// Mean-zero normal; unbounded, so not admissible for bound verification.
    Gaussian { sd: f64 },
    /// Symmetric triangular density on `[-a, a]`.
    Triangular { a: f64 },
}

impl Marginal {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Uniform { a } => (2.0 * rng.gen::<f64>() - 1.0) * a,
            Marginal::Rademacher { m } => {
                if rng.gen::<bool>() {
                    m
                } else {
                    -m
                }
            }
            Marginal::Gaussian { sd } => {
                use rand_distr::Distribution;
                rand_distr::Normal::new(0.0, sd).unwrap().sample(rng)
            }
            Marginal::Triangular { a } => (rng.gen::<f64>() + rng.gen::<f64>() - 1.0) * a,
        }
    }

    /// Sup bound of the marginal, if bounded.
    pub fn sup_bound(&self) -> Option<f64> {
        match *self {
            Marginal::Uniform { a } => Some(a),
            Marginal::Rademacher { m } => Some(m),
            Marginal::Gaussian { .. } => None,
            Marginal::Triangular { a } => Some(a),
        }
    }

    /// Exact standard deviation.
    pub fn std_dev(&self) -> f64 {
        match *self {
            Marginal::Uniform { a } => a / 3f64.sqrt(),
            Marginal::Rademacher { m } => m,
            Marginal::Gaussian { sd } => sd,
            Marginal::Triangular { a } => a / 6f64.sqrt(),
        }
    }
}

/// Innovation field kind.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InnovationKind {
    /// Independent draws at distinct points.
    Iid,
    /// Average of iid atoms within `radius`; sigma-fields of point sets at
    /// distance > 2 radius are independent, so the field is alpha-mixing with
    /// coefficient zero beyond 2 radius.
    MDependent { radius: f64 },
}

/// Innovation values attached to a location set, with generation provenance.
#[derive(Debug, Clone)]
pub struct InnovationField {
    pub ls: Arc<LocationSet>,
    pub values: Vec<f64>,
    pub kind: InnovationKind,
    pub marginal: Marginal,
    pub seed: u64,
    pub replication: u64,
}

/// Per-point neighbor lists within a fixed radius, sorted by distance.
/// Built once per location set and reused across replications.
#[derive(Debug, Clone)]
struct NeighborLists {
    offsets: Vec<usize>,
    /// (neighbor index, distance) pairs, ascending distance per point.
    entries: Vec<(u32, f64)>,
}

impl NeighborLists {
    fn build(ls: &LocationSet, radius: f64) -> NeighborLists {
        let n = ls.len();
        let d = ls.dim();
        let mut lo = vec![0.0; d];
        let mut max_extent = 0.0f64;
        for k in 0..d {
            let (l, h) = ls.axis_range(k);
            lo[k] = l;
            max_extent = max_extent.max(h - l);
        }
        // Cell side must be at least the query radius so the 3^d neighborhood
        // suffices; cap the per-axis cell count to keep the grid small.
        let cell = radius.max(max_extent / 256.0).max(1e-9);
        let mut dims = vec![0usize; d];
        for k in 0..d {
            let (l, h) = ls.axis_range(k);
            dims[k] = ((h - l) / cell).floor() as usize + 1;
        }
        let cell_of = |p: &[f64], k: usize| -> isize {
            ((((p[k] - lo[k]) / cell).floor() as isize).max(0)).min(dims[k] as isize - 1)
        };
        let flat = |coords: &[isize]| -> usize {
            let mut idx = 0usize;
            for (k, &c) in coords.iter().enumerate() {
                idx = idx * dims[k] + c as usize;
            }
            idx
        };
        let total: usize = dims.iter().product();
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); total];
        let mut coords = vec![0isize; d];
        for (i, p) in ls.points().enumerate() {
            for k in 0..d {
                coords[k] = cell_of(p, k);
            }
            buckets[flat(&coords)].push(i as u32);
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        let mut local: Vec<(u32, f64)> = Vec::new();
        let mut probe = vec![0isize; d];
        for (i, p) in ls.points().enumerate() {
            for k in 0..d {
                coords[k] = cell_of(p, k);
            }
            local.clear();
            // Walk the 3^d neighborhood with an odometer over offsets.
            let mut offs = vec![-1isize; d];
            'cells: loop {
                let mut ok = true;
                for k in 0..d {
                    probe[k] = coords[k] + offs[k];
                    if probe[k] < 0 || probe[k] >= dims[k] as isize {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    for &j in &buckets[flat(&probe)] {
                        let dist = euclidean(p, ls.point(j as usize));
                        if dist <= radius {
                            local.push((j, dist));
                        }
                    }
                }
                let mut k = d;
                loop {
                    if k == 0 {
                        break 'cells;
                    }
                    k -= 1;
                    if offs[k] < 1 {
                        offs[k] += 1;
                        for o in offs.iter_mut().skip(k + 1) {
                            *o = -1;
                        }
                        break;
                    }
                }
            }
            local.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            debug_assert_eq!(local.first().map(|e| e.0), Some(i as u32));
            entries.extend_from_slice(&local);
            offsets.push(entries.len());
        }
        NeighborLists { offsets, entries }
    }

    fn of(&self, i: usize) -> &[(u32, f64)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Weight profile of the NED moving average.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "decay", rename_all = "kebab-case")]
pub enum WeightDecay {
    /// `w(r) = nu^{-b r^gamma}`.
    Geometric { b: f64, gamma: f64, nu: f64 },
    /// `w(r) = (1 + r)^{-(nu1 + d/2 + delta)}`; the exponent is inflated so
    /// the aggregated L2 tail over a d-dimensional shell decays like
    /// `r^{-nu1}`. `delta` defaults to 0.5.
    Algebraic { nu1: f64, delta: f64 },
    /// All weight at the point itself (the b -> infinity limit).
    SelfOnly,
}

impl WeightDecay {
    pub fn weight(&self, r: f64, dim: usize) -> f64 {
        match *self {
            WeightDecay::Geometric { b, gamma, nu } => nu.powf(-b * r.powf(gamma)),
            WeightDecay::Algebraic { nu1, delta } => {
                (1.0 + r).powf(-(nu1 + dim as f64 / 2.0 + delta))
            }
            WeightDecay::SelfOnly => {
                if r == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius beyond which weights drop below `floor` relative to w(0).
    fn support_radius(&self, floor: f64, dim: usize) -> f64 {
        match *self {
            WeightDecay::Geometric { b, gamma, nu } => (floor.ln() / (-b * nu.ln()))
                .max(0.0)
                .powf(1.0 / gamma),
            WeightDecay::Algebraic { nu1, delta } => {
                floor.powf(-1.0 / (nu1 + dim as f64 / 2.0 + delta)) - 1.0
            }
            WeightDecay::SelfOnly => 0.0,
        }
    }
}

/// Optional Lipschitz link applied to the linear moving average.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "link", rename_all = "kebab-case")]
pub enum Link {
    Identity,
    Abs,
    /// `u -> clamp(scale * u + shift, lo, hi)`; Lipschitz modulus `|scale|`.
    ClampAffine {
        scale: f64,
        shift: f64,
        lo: f64,
        hi: f64,
    },
}

impl Link {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Link::Identity => u,
            Link::Abs => u.abs(),
            Link::ClampAffine {
                scale,
                shift,
                lo,
                hi,
            } => (scale * u + shift).clamp(lo, hi),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Link::Identity | Link::Abs => 1.0,
            Link::ClampAffine { scale, .. } => scale.abs(),
        }
    }
}

/// Full specification of a NED field over a base innovation field.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NedSpec {
    pub decay: WeightDecay,
    pub link: Link,
    /// Hard clip applied after the link for bound-verification runs; clips
    /// are counted so parameter choices keeping them at zero are visible.
    pub clamp: Option<f64>,
    /// Relative weight floor that truncates the neighbor lists.
    pub weight_floor: f64,
}

impl NedSpec {
    pub fn linear(decay: WeightDecay) -> NedSpec {
        NedSpec {
            decay,
            link: Link::Identity,
            clamp: None,
            weight_floor: 1e-12,
        }
    }
}

/// One realization of a NED field, with the base innovations retained so
/// truncated projections can be formed at any radius.
#[derive(Debug, Clone)]
pub struct NedField {
    pub values: Vec<f64>,
    /// Base innovation values (the epsilon field).
    pub innovations: Vec<f64>,
    pub clip_count: usize,
    pub seed: u64,
    pub replication: u64,
}

/// Precomputed generator: neighbor lists and weights are built once per
/// location set and shared across replications.
pub struct FieldGenerator {
    pub ls: Arc<LocationSet>,
    pub innovation_kind: InnovationKind,
    pub marginal: Marginal,
    pub spec: NedSpec,
    ned_neighbors: NeighborLists,
    ned_weights: Vec<f64>,
    base_neighbors: Option<NeighborLists>,
}

impl FieldGenerator {
    pub fn new(
        ls: Arc<LocationSet>,
        innovation_kind: InnovationKind,
        marginal: Marginal,
        spec: NedSpec,
    ) -> Result<FieldGenerator, FieldError> {
        let radius = spec
            .decay
            .support_radius(spec.weight_floor, ls.dim())
            .min(ls.diameter_upper_bound());
        let ned_neighbors = NeighborLists::build(&ls, radius);
        let mut ned_weights = Vec::with_capacity(ned_neighbors.entries.len());
        for i in 0..ls.len() {
            let mut total = 0.0;
            for &(_, dist) in ned_neighbors.of(i) {
                let w = spec.decay.weight(dist, ls.dim());
                ned_weights.push(w);
                total += w.abs();
            }
            if total < 1e-12 {
                return Err(FieldError::DegenerateWeights(total));
            }
        }
        let base_neighbors = match innovation_kind {
            InnovationKind::Iid => None,
            InnovationKind::MDependent { radius } => {
                if radius < 0.0 {
                    return Err(FieldError::BadParameter("m-dependence radius < 0".into()));
                }
                Some(NeighborLists::build(&ls, radius))
            }
        };
        Ok(FieldGenerator {
            ls,
            innovation_kind,
            marginal,
            spec,
            ned_neighbors,
            ned_weights,
            base_neighbors,
        })
    }

    /// Draw the base innovation field for one replication.
    pub fn innovations(&self, seed: u64, replication: u64) -> InnovationField {
        let mut stream = rng::stream(seed, replication);
        let n = self.ls.len();
        let atoms: Vec<f64> = (0..n).map(|_| self.marginal.sample(&mut stream)).collect();
        let values = match &self.base_neighbors {
            None => atoms,
            Some(nb) => (0..n)
                .map(|i| {
                    let list = nb.of(i);
                    list.iter().map(|&(j, _)| atoms[j as usize]).sum::<f64>() / list.len() as f64
                })
                .collect(),
        };
        InnovationField {
            ls: Arc::clone(&self.ls),
            values,
            kind: self.innovation_kind,
            marginal: self.marginal,
            seed,
            replication,
        }
    }

    /// Generate the NED field for one replication.
    pub fn generate(&self, seed: u64, replication: u64) -> NedField {
        let base = self.innovations(seed, replication);
        self.generate_from(&base)
    }

    pub fn generate_from(&self, base: &InnovationField) -> NedField {
        let n = self.ls.len();
        let mut values = Vec::with_capacity(n);
        let mut clip_count = 0usize;
        for i in 0..n {
            let list = self.ned_neighbors.of(i);
            let ws = &self.ned_weights[self.ned_neighbors.offsets[i]..self.ned_neighbors.offsets[i + 1]];
            let lin: f64 = list
                .iter()
                .zip(ws)
                .map(|(&(j, _), &w)| w * base.values[j as usize])
                .sum();
            let mut z = self.spec.link.eval(lin);
            if let Some(a) = self.spec.clamp {
                let clipped = z.clamp(-a, a);
                if clipped != z {
                    clip_count += 1;
                }
                z = clipped;
            }
            values.push(z);
        }
        NedField {
            values,
            innovations: base.values.clone(),
            clip_count,
            seed: base.seed,
            replication: base.replication,
        }
    }

    /// Truncated projection `Z^{(r)}`: the moving average restricted to
    /// innovations within radius `r` of each point, passed through the same
    /// link and clamp.
    pub fn truncated(&self, field: &NedField, r: f64) -> Vec<f64> {
        let n = self.ls.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let list = self.ned_neighbors.of(i);
            let ws = &self.ned_weights[self.ned_neighbors.offsets[i]..self.ned_neighbors.offsets[i + 1]];
            let lin: f64 = list
                .iter()
                .zip(ws)
                .take_while(|(&(_, dist), _)| dist <= r)
                .map(|(&(j, _), &w)| w * field.innovations[j as usize])
                .sum();
            let mut z = self.spec.link.eval(lin);
            if let Some(a) = self.spec.clamp {
                z = z.clamp(-a, a);
            }
            out.push(z);
        }
        out
    }

    /// Linear part without the link, for Lipschitz-closure checks.
    pub fn linear_part(&self, field: &NedField, r: Option<f64>) -> Vec<f64> {
        let n = self.ls.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let list = self.ned_neighbors.of(i);
            let ws = &self.ned_weights[self.ned_neighbors.offsets[i]..self.ned_neighbors.offsets[i + 1]];
            let lin: f64 = match r {
                None => list
                    .iter()
                    .zip(ws)
                    .map(|(&(j, _), &w)| w * field.innovations[j as usize])
                    .sum(),
                Some(r) => list
                    .iter()
                    .zip(ws)
                    .take_while(|(&(_, dist), _)| dist <= r)
                    .map(|(&(j, _), &w)| w * field.innovations[j as usize])
                    .sum(),
            };
            out.push(lin);
        }
        out
    }
}

/// One row of the empirical NED-coefficient table.
#[derive(Debug, Clone)]
pub struct NedCoefficientRow {
    pub r: f64,
    /// Estimated `||Z - Z^{(r)}||_p` at the reference point.
    pub norm: f64,
    /// Monte Carlo standard error of the norm estimate.
    pub se: f64,
    /// Whether `|link(L) - link(L^{(r)})| <= Lip |L - L^{(r)}|` held in every
    /// replication.
    pub closure_ok: bool,
}

/// Estimate `||Z - Z^{(r)}||_p` at the point closest to the set centroid,
/// across independent replications, with the per-replication Lipschitz
/// closure check.
pub fn empirical_ned_coefficient(
    gen: &FieldGenerator,
    r_grid: &[f64],
    p: f64,
    replications: u64,
    seed: u64,
) -> Vec<NedCoefficientRow> {
    assert!(p >= 1.0, "p must be at least 1");
    assert!(replications >= 100, "need at least 100 replications");
    let ls = &gen.ls;
    let d = ls.dim();
    let mut centroid = vec![0.0; d];
    for pt in ls.points() {
        for (c, x) in centroid.iter_mut().zip(pt) {
            *c += x;
        }
    }
    for c in centroid.iter_mut() {
        *c /= ls.len() as f64;
    }
    let reference = (0..ls.len())
        .min_by(|&i, &j| {
            euclidean(ls.point(i), &centroid)
                .partial_cmp(&euclidean(ls.point(j), &centroid))
                .unwrap()
        })
        .unwrap();

    let lip = gen.spec.link.lipschitz();
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let mut sum_pow = 0.0;
        let mut sum_pow2 = 0.0;
        let mut closure_ok = true;
        for rep in 0..replications {
            let field = gen.generate(seed, rep);
            let trunc = gen.truncated(&field, r);
            let gap = (field.values[reference] - trunc[reference]).abs();
            let lin_full = gen.linear_part(&field, None)[reference];
            let lin_trunc = gen.linear_part(&field, Some(r))[reference];
            let linked_gap =
                (gen.spec.link.eval(lin_full) - gen.spec.link.eval(lin_trunc)).abs();
            if linked_gap > lip * (lin_full - lin_trunc).abs() + 1e-12 {
                closure_ok = false;
            }
            let v = gap.powf(p);
            sum_pow += v;
            sum_pow2 += v * v;
        }
        let reps = replications as f64;
        let mean = sum_pow / reps;
        let var = (sum_pow2 / reps - mean * mean).max(0.0);
        let se_moment = (var / reps).sqrt();
        let norm = mean.powf(1.0 / p);
        // Delta method on x -> x^{1/p}.
        let se = if mean > 0.0 {
            se_moment * norm / (p * mean)
        } else {
            0.0
        };
        rows.push(NedCoefficientRow {
            r,
            norm,
            se,
            closure_ok,
        });
    }
    rows
}

/// Location sampling schemes realizing Assumptions 1-4.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum LocationScheme {
    /// Grid of pitch `pitch` with per-coordinate jitter up to `jitter`,
    /// truncated to the first `n` lattice sites.
    JitteredGrid {
        d: usize,
        n: usize,
        pitch: f64,
        jitter: f64,
        d0: f64,
        h0: f64,
    },
    /// Rejection-sampled hardcore process in a box.
    HardcorePoisson {
        d: usize,
        n: usize,
        d0: f64,
        box_len: f64,
        max_rounds: usize,
    },
    /// Three axis-aligned rays diverging from the origin region in R^2, so an
    /// axis-aligned three-rectangle cover has effective dimension 1.
    Figure1Lines {
        n: usize,
        pitch: f64,
        jitter: f64,
        d0: f64,
        h0: f64,
    },
}

pub fn sample_locations(scheme: &LocationScheme, seed: u64) -> Result<LocationSet, FieldError> {
    match *scheme {
        LocationScheme::JitteredGrid {
            d,
            n,
            pitch,
            jitter,
            d0,
            h0,
        } => {
            if pitch <= 0.0 || jitter < 0.0 || 2.0 * jitter + d0 >= pitch {
                return Err(FieldError::BadParameter(format!(
                    "need pitch > d0 + 2 jitter, got pitch={pitch} jitter={jitter} d0={d0}"
                )));
            }
            let side = (n as f64).powf(1.0 / d as f64).ceil() as usize;
            let mut stream = rng::stream(seed, 0);
            let mut coords = Vec::with_capacity(n * d);
            'outer: for flat in 0..side.pow(d as u32) {
                let mut rem = flat;
                let mut site = vec![0usize; d];
                for k in (0..d).rev() {
                    site[k] = rem % side;
                    rem /= side;
                }
                for k in 0..d {
                    let j = if jitter > 0.0 {
                        jitter * (2.0 * stream.gen::<f64>() - 1.0)
                    } else {
                        0.0
                    };
                    coords.push((site[k] as f64 + 0.5) * pitch + j);
                }
                if coords.len() >= n * d {
                    break 'outer;
                }
            }
            let ls = LocationSet::new(d, coords, d0)?;
            check_assumption4(&ls, h0, d)?;
            Ok(ls)
        }
        LocationScheme::HardcorePoisson {
            d,
            n,
            d0,
            box_len,
            max_rounds,
        } => {
            let mut stream = rng::stream(seed, 0);
            let mut accepted: Vec<f64> = Vec::new();
            let mut count = 0usize;
            let mut rounds = 0usize;
            while count < n {
                if rounds >= max_rounds {
                    return Err(FieldError::HardcoreInfeasible { rounds, d0 });
                }
                rounds += 1;
                let cand: Vec<f64> = (0..d).map(|_| stream.gen::<f64>() * box_len).collect();
                let ok = accepted
                    .chunks_exact(d)
                    .all(|p| euclidean(p, &cand) > d0);
                if ok {
                    accepted.extend_from_slice(&cand);
                    count += 1;
                }
            }
            Ok(LocationSet::new(d, accepted, d0)?)
        }
        LocationScheme::Figure1Lines {
            n,
            pitch,
            jitter,
            d0,
            h0,
        } => {
            if 2.0 * jitter + d0 >= pitch {
                return Err(FieldError::BadParameter(
                    "need pitch > d0 + 2 jitter for the line layout".into(),
                ));
            }
            if jitter >= h0 / 2.0 {
                return Err(FieldError::BadParameter(
                    "transverse jitter must stay below H0/2".into(),
                ));
            }
            let mut stream = rng::stream(seed, 0);
            let r0 = 2.0 * pitch.max(d0);
            let mut coords = Vec::with_capacity(n * 2);
            // Rays East (+x), North (+y), West (-x).
            for i in 0..n {
                let ray = i % 3;
                let step = (i / 3) as f64;
                let along = r0 + step * pitch;
                let t = if jitter > 0.0 {
                    jitter * (2.0 * stream.gen::<f64>() - 1.0)
                } else {
                    0.0
                };
                match ray {
                    0 => coords.extend_from_slice(&[along, t]),
                    1 => coords.extend_from_slice(&[t, along]),
                    _ => coords.extend_from_slice(&[-along, t]),
                }
            }
            let ls = LocationSet::new(2, coords, d0)?;
            check_assumption4(&ls, h0, 1)?;
            Ok(ls)
        }
    }
}

fn check_assumption4(ls: &LocationSet, h0: f64, d2: usize) -> Result<(), FieldError> {
    let diameter = ls.diameter_upper_bound();
    let limit = h0 / 2.0 * (ls.len() as f64).powf(1.0 / d2 as f64);
    if diameter > limit {
        return Err(FieldError::Assumption4 { diameter, limit });
    }
    Ok(())
}

/// Evaluable truth functions for regression studies.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "fn", rename_all = "kebab-case")]
pub enum TruthFn {
    Const { c: f64 },
    Affine { intercept: f64, slope: f64 },
    /// `amp * sin(2 pi freq x)`.
    Sin { amp: f64, freq: f64 },
    /// `scale * |x - center|`: Lipschitz with a kink, Holder exponent 1.
    AbsKink { center: f64, scale: f64 },
}

impl TruthFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TruthFn::Const { c } => c,
            TruthFn::Affine { intercept, slope } => intercept + slope * x,
            TruthFn::Sin { amp, freq } => amp * (2.0 * std::f64::consts::PI * freq * x).sin(),
            TruthFn::AbsKink { center, scale } => scale * (x - center).abs(),
        }
    }
}

/// Covariate design for regression samples.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "design", rename_all = "kebab-case")]
pub enum CovariateDesign {
    /// Iid uniform on `[lo, hi]`.
    Iid { lo: f64, hi: f64 },
    /// NED field squashed through a clamp-affine link into `[lo, hi]`.
    FromNed {
        lo: f64,
        hi: f64,
        scale: f64,
        decay: WeightDecay,
    },
}

/// Regression sample with the generating truth retained for error evaluation.
#[derive(Debug, Clone)]
pub struct RegressionSample {
    pub ls: Arc<LocationSet>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub mean_fn: TruthFn,
    pub sd_fn: TruthFn,
    pub seed: u64,
    pub replication: u64,
}

/// Draw `Y = m(X) + sigma(X) e` with conditionally mean-zero noise.
pub fn sample_regression(
    ls: &Arc<LocationSet>,
    design: &CovariateDesign,
    mean_fn: TruthFn,
    sd_fn: TruthFn,
    noise: Marginal,
    seed: u64,
    replication: u64,
) -> Result<RegressionSample, FieldError> {
    let n = ls.len();
    // Stream 2*rep draws covariates, 2*rep+1 the noise, so the two are
    // independent.
    let x: Vec<f64> = match design {
        CovariateDesign::Iid { lo, hi } => {
            let mut stream = rng::stream(seed, 2 * replication);
            (0..n).map(|_| lo + (hi - lo) * stream.gen::<f64>()).collect()
        }
        CovariateDesign::FromNed {
            lo,
            hi,
            scale,
            decay,
        } => {
            let mid = (lo + hi) / 2.0;
            let spec = NedSpec {
                decay: *decay,
                link: Link::ClampAffine {
                    scale: *scale,
                    shift: mid,
                    lo: *lo,
                    hi: *hi,
                },
                clamp: None,
                weight_floor: 1e-12,
            };
            let gen = FieldGenerator::new(
                Arc::clone(ls),
                InnovationKind::Iid,
                Marginal::Uniform { a: 1.0 },
                spec,
            )?;
            gen.generate(seed, 2 * replication).values
        }
    };
    let mut noise_stream = rng::stream(seed, 2 * replication + 1);
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| mean_fn.eval(xi) + sd_fn.eval(xi) * noise.sample(&mut noise_stream))
        .collect();
    Ok(RegressionSample {
        ls: Arc::clone(ls),
        x,
        y,
        mean_fn,
        sd_fn,
        seed,
        replication,
    })
}
