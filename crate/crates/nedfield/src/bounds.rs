//! Closed-form tail-bound evaluators and sample-size thresholds.
//!
//! Every formula is evaluated in double precision exactly as displayed, with
//! compensated summation for the term totals. Values above 1 are reported
//! raw; clipping to 1 happens only at the presentation layer. `log_nu N` is
//! `ln N / ln nu`, so bounds are only evaluated for `N >= 2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{cube_capacity, floor_tol};

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("threshold t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("bounds are evaluated only for N >= 2, got {0}")]
    SmallN(u64),
    #[error("dependence kind {found:?} does not match the bound ({expected:?})")]
    KindMismatch {
        expected: DependenceKind,
        found: DependenceKind,
    },
    #[error("q = {q} out of range: need 1 <= q <= N_hat/2 = {limit}")]
    QOutOfRange { q: u64, limit: f64 },
    #[error("L^s order must satisfy s >= 2, got {0}")]
    BadSOrder(f64),
    #[error("threshold search did not terminate below the ceiling {ceiling}")]
    ThresholdOverflow { ceiling: u64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DependenceKind {
    GeometricNed,
    AlgebraicNed,
    GeometricMixing,
}

/// Scale function `alpha(N)` bounding `max_i alpha_{iN}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "kebab-case")]
pub enum AlphaScale {
    Constant { c: f64 },
    /// `alpha(N) = N^kappa`.
    Power { kappa: f64 },
}

impl AlphaScale {
    pub fn eval(&self, n: f64) -> f64 {
        match *self {
            AlphaScale::Constant { c } => c,
            AlphaScale::Power { kappa } => n.powf(kappa),
        }
    }
}

/// Proof-level constants of the algebraic-NED bound. The proof pins them
/// only via existence arguments, so they are configuration knobs with
/// default 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Theorem2Constants {
    pub c_star: f64,
    pub c_double_star: f64,
    pub k3: f64,
    pub k4: f64,
}

impl Default for Theorem2Constants {
    fn default() -> Self {
        Theorem2Constants {
            c_star: 1.0,
            c_double_star: 1.0,
            k3: 1.0,
            k4: 1.0,
        }
    }
}

/// Every dependence-side symbol entering a bound formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceParams {
    pub kind: DependenceKind,
    /// L^p order of the NED condition (p >= 1).
    pub p: f64,
    /// Geometric decay `psi(r) = nu^{-b r^gamma}`.
    pub b: f64,
    pub gamma: f64,
    pub nu: f64,
    /// Algebraic NED / mixing rates `psi_Z(r) = r^{-nu1}`, `psi_eps = r^{-nu2}`.
    pub nu1: f64,
    pub nu2: f64,
    /// Mixing scale `phi(x, y) = (x + y)^tau`.
    pub tau: f64,
    /// Growth exponent of `max alpha_{iN} <= N^kappa`.
    pub kappa: f64,
    /// Free exponent of the geometric-NED remainder term.
    pub beta: f64,
    /// Moment slack of the algebraic bound.
    pub delta: f64,
    /// Sup bound `||Z||_inf <= A`.
    pub a_sup: f64,
    /// L2 bound `||Z||_2 <= sigma`.
    pub sigma: f64,
    /// (2+delta)-moment bound.
    pub sigma_2_delta: f64,
    /// `max_{ij} |E[Z_i Z_j]|`.
    pub sigma_bar: f64,
    /// L^s order of the algebraic bound (s >= 2).
    pub s: f64,
    pub alpha_scale: AlphaScale,
    #[serde(default)]
    pub constants: Theorem2Constants,
}

impl DependenceParams {
    /// Geometric-NED defaults at the given decay; remaining symbols neutral.
    pub fn geometric(b: f64, gamma: f64, nu: f64, kappa: f64, beta: f64, tau: f64, p: f64) -> Self {
        DependenceParams {
            kind: DependenceKind::GeometricNed,
            p,
            b,
            gamma,
            nu,
            nu1: 1.0,
            nu2: 1.0,
            tau,
            kappa,
            beta,
            delta: 1.0,
            a_sup: 1.0,
            sigma: 1.0,
            sigma_2_delta: 1.0,
            sigma_bar: 0.0,
            s: 2.0,
            alpha_scale: AlphaScale::Constant { c: 1.0 },
            constants: Theorem2Constants::default(),
        }
    }
}

/// Geometry-side constants of the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub d: usize,
    pub d1: usize,
    pub d2: usize,
    pub h0: f64,
    pub d0: f64,
    /// Derived cube capacity `C0`.
    pub c0: f64,
}

impl GeometryParams {
    pub fn new(d: usize, d1: usize, h0: f64, d0: f64) -> Result<Self, BoundError> {
        if d == 0 || d1 >= d {
            return Err(BoundError::BadParameter(format!(
                "need 0 <= d1 < d, got d={d} d1={d1}"
            )));
        }
        if h0 < 1.0 || d0 <= 0.0 {
            return Err(BoundError::BadParameter(format!(
                "need H0 >= 1 and d0 > 0, got H0={h0} d0={d0}"
            )));
        }
        Ok(GeometryParams {
            d,
            d1,
            d2: d - d1,
            h0,
            d0,
            c0: cube_capacity(h0, d0, d),
        })
    }
}

/// One named addend of a tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
}

/// Probability upper bound at threshold `t`, reported raw (possibly > 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    pub t: f64,
    pub terms: Vec<Term>,
    /// Compensated sum of the terms.
    pub value: f64,
    /// Sample size from which the bound statement applies.
    pub valid_from_n: u64,
}

impl TailBound {
    fn from_terms(t: f64, terms: Vec<Term>, valid_from_n: u64) -> TailBound {
        let value = kahan_sum(terms.iter().map(|term| term.value));
        TailBound {
            t,
            terms,
            value,
            valid_from_n,
        }
    }

    /// Presentation-layer value, clipped to `[0, 1]`.
    pub fn clipped(&self) -> f64 {
        self.value.min(1.0)
    }
}

/// Kahan-Babuska compensated summation.
pub fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn log_base(nu: f64, n: f64) -> f64 {
    n.ln() / nu.ln()
}

fn check_nt(n: u64, t: f64) -> Result<(), BoundError> {
    if t <= 0.0 {
        return Err(BoundError::NonPositiveT(t));
    }
    if n < 2 {
        return Err(BoundError::SmallN(n));
    }
    Ok(())
}

/// `K1 = (C0 / H0^{d2})^{(2(kappa+beta)+tau+1)/p}`.
pub fn k1_constant(dep: &DependenceParams, geo: &GeometryParams) -> f64 {
    (geo.c0 / geo.h0.powi(geo.d2 as i32)).powf((2.0 * (dep.kappa + dep.beta) + dep.tau + 1.0) / dep.p)
}

/// `K2 = 2^{8+d2} (C0 ((2(kappa+beta)+tau+1)/b)^{1/gamma})^{d2}`.
pub fn k2_constant(dep: &DependenceParams, geo: &GeometryParams) -> f64 {
    let inner = geo.c0 * ((2.0 * (dep.kappa + dep.beta) + dep.tau + 1.0) / dep.b).powf(1.0 / dep.gamma);
    2f64.powi(8 + geo.d2 as i32) * inner.powi(geo.d2 as i32)
}

fn exponential_term(dep: &DependenceParams, geo: &GeometryParams, n: u64, t: f64) -> f64 {
    let nf = n as f64;
    let k2 = k2_constant(dep, geo);
    let log_factor = log_base(dep.nu, nf).powf(geo.d2 as f64 / dep.gamma);
    let c0s = geo.c0 * dep.sigma;
    let denom = k2 * log_factor * (c0s * c0s + 4.0 * geo.c0 * dep.a_sup * t / 3.0);
    4.0 * (-(nf * t * t) / denom).exp()
}

/// Geometric-NED tail bound: polynomial remainder plus exponential term.
pub fn bound_theorem1(
    dep: &DependenceParams,
    geo: &GeometryParams,
    n: u64,
    t: f64,
) -> Result<TailBound, BoundError> {
    if dep.kind != DependenceKind::GeometricNed {
        return Err(BoundError::KindMismatch {
            expected: DependenceKind::GeometricNed,
            found: dep.kind,
        });
    }
    check_nt(n, t)?;
    let nf = n as f64;
    let k1 = k1_constant(dep, geo);
    let remainder =
        2.0 * k1 * (1.0 / (nf.powf(dep.kappa + 2.0 * dep.beta + dep.tau + 1.0) * t)).powf(dep.p);
    let exponential = exponential_term(dep, geo, n, t);
    let valid = validity_threshold(dep, geo);
    Ok(TailBound::from_terms(
        t,
        vec![
            Term {
                name: "remainder",
                value: remainder,
            },
            Term {
                name: "exponential",
                value: exponential,
            },
        ],
        valid,
    ))
}

/// Geometric alpha-mixing tail bound: the exponential term alone.
pub fn bound_corollary1(
    dep: &DependenceParams,
    geo: &GeometryParams,
    n: u64,
    t: f64,
) -> Result<TailBound, BoundError> {
    if dep.kind == DependenceKind::AlgebraicNed {
        return Err(BoundError::KindMismatch {
            expected: DependenceKind::GeometricMixing,
            found: dep.kind,
        });
    }
    check_nt(n, t)?;
    let exponential = exponential_term(dep, geo, n, t);
    let valid = validity_threshold(dep, geo);
    Ok(TailBound::from_terms(
        t,
        vec![Term {
            name: "exponential",
            value: exponential,
        }],
        valid,
    ))
}

/// `v(q)` of the algebraic bound.
pub fn theorem2_v(dep: &DependenceParams, geo: &GeometryParams, n: u64, q: u64) -> f64 {
    let nf = n as f64;
    let d2 = geo.d2 as f64;
    let nq = nf / (q as f64).powf(d2);
    let b_nq = dep.constants.c_star * nq.powf(-dep.nu2 * dep.delta / (d2 * (2.0 + dep.delta)) + 1.0);
    let branch1 = dep.sigma * dep.sigma + dep.sigma_2_delta * dep.sigma_2_delta * b_nq;
    let alpha_n = dep.alpha_scale.eval(nf);
    let inner = dep
        .sigma_bar
        .max(dep.sigma_bar * dep.sigma_bar)
        .max(2.0 / 3f64.powf(d2) * dep.sigma * alpha_n * nq.powf(-dep.nu1 / d2));
    let branch2 =
        3.0 * (geo.c0 * dep.constants.c_double_star * (2.0 / (3.0 * geo.h0)).powf(d2)) * nq * inner;
    branch1.max(branch2)
}

/// Algebraic-NED tail bound: exponential, coupling, and projection terms.
pub fn bound_theorem2(
    dep: &DependenceParams,
    geo: &GeometryParams,
    n: u64,
    t: f64,
    q: u64,
) -> Result<TailBound, BoundError> {
    if dep.kind != DependenceKind::AlgebraicNed {
        return Err(BoundError::KindMismatch {
            expected: DependenceKind::AlgebraicNed,
            found: dep.kind,
        });
    }
    check_nt(n, t)?;
    if dep.s < 2.0 {
        return Err(BoundError::BadSOrder(dep.s));
    }
    let nf = n as f64;
    let d1 = geo.d1 as f64;
    let d2 = geo.d2 as f64;
    // q is checked against the guaranteed N_hat lower bound H0^{d2} N / C0.
    let n_hat = geo.h0.powf(d2) * nf / geo.c0;
    if q == 0 || (q as f64) > n_hat / 2.0 {
        return Err(BoundError::QOutOfRange {
            q,
            limit: n_hat / 2.0,
        });
    }
    let qf = q as f64;
    let nq = nf / qf.powf(d2);
    let v = theorem2_v(dep, geo, n, q);
    let h0d1 = geo.h0.powf(d1);
    let exp_denom = 32.0
        * geo.c0
        * (2f64.powf(d2 - 1.0) * v + dep.a_sup * h0d1 * nf * t / (12.0 * (2.0 * qf).powf(d2) * geo.c0));
    let exponential = 2.0 * (-(h0d1 * nf * t * t) / exp_denom).exp();
    let coupling = 11.0
        * dep.constants.k3
        * (1.0 + 8.0 * dep.a_sup * geo.h0.powf(d2 - d1) / t).sqrt()
        * qf.powf(d2)
        * nq.powf(-dep.nu2 / d2 + dep.tau);
    let alpha_n = dep.alpha_scale.eval(nf);
    let projection = dep.constants.k4 * nq.powf(-dep.s * dep.nu1 / d2) * (alpha_n / t).powf(dep.s);
    Ok(TailBound::from_terms(
        t,
        vec![
            Term {
                name: "exponential",
                value: exponential,
            },
            Term {
                name: "coupling",
                value: coupling,
            },
            Term {
                name: "projection",
                value: projection,
            },
        ],
        2,
    ))
}

/// The comparison bound `C1* exp(-C2* N^{1/(2d+2)} t^2)`.
pub fn bound_xu_comparison(c1: f64, c2: f64, d: usize, n: u64, t: f64) -> f64 {
    let nf = n as f64;
    c1 * (-c2 * nf.powf(1.0 / (2.0 * d as f64 + 2.0)) * t * t).exp()
}

/// VC-class uniform deviation bound `40 exp(-N t^2 / (48 A)^2)`.
pub fn bound_vc_uniform(a: f64, n: u64, t: f64) -> f64 {
    let nf = n as f64;
    40.0 * (-(nf * t * t) / (48.0 * a).powi(2)).exp()
}

/// Weak DKW bound over rectangles: `40 exp(-N t^2 / 2304)`.
pub fn bound_dkw(n: u64, t: f64) -> f64 {
    40.0 * (-(n as f64) * t * t / 2304.0).exp()
}

/// Smallest `n >= domain_start` satisfying the predicate, by doubling plus
/// bisection; verified at the boundary and falls back to a linear scan when
/// the predicate is not monotone at the crossing.
pub fn monotone_min_n<F: Fn(u64) -> bool>(
    domain_start: u64,
    ceiling: u64,
    pred: F,
) -> Result<u64, BoundError> {
    let start = domain_start.max(1);
    if pred(start) {
        return Ok(start);
    }
    let mut lo = start;
    let mut hi = start;
    loop {
        hi = hi.saturating_mul(2);
        if hi > ceiling {
            return Err(BoundError::ThresholdOverflow { ceiling });
        }
        if pred(hi) {
            break;
        }
        lo = hi;
    }
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if pred(hi) && !pred(hi - 1) {
        return Ok(hi);
    }
    // Non-monotone crossing: scan.
    (start..=ceiling)
        .find(|&n| pred(n))
        .ok_or(BoundError::ThresholdOverflow { ceiling })
}

/// `N0` for attaching to a bound, saturating to `u64::MAX` when the
/// threshold search diverges (parameters can make `N0` astronomically large
/// or outright unattainable, e.g. `kappa + beta = 0` with a flat log
/// exponent).
fn validity_threshold(dep: &DependenceParams, geo: &GeometryParams) -> u64 {
    match thresholds_theorem1(dep, geo, 1 << 40) {
        Ok(th) => th.n0.max(2),
        Err(_) => u64::MAX,
    }
}

/// Sample-size thresholds of the geometric-NED bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Thresholds {
    pub n1: u64,
    pub n2: u64,
    pub n_floor: u64,
    /// `N0 = max(N1, N2, H0^{d2-d1}/2^{d2})`.
    pub n0: u64,
}

/// `C1`, the constant of the blocking requirement (B.3).
pub fn c1_constant(dep: &DependenceParams, geo: &GeometryParams) -> f64 {
    let d = geo.d as f64;
    let d2 = geo.d2 as f64;
    let e32 = (1.5f64).exp();
    let pow2 = 2f64.powf(1.5 * dep.tau * d + d2 * (dep.tau + 1.0));
    let spacing = 3.0 * ((2.0 * (dep.kappa + dep.beta) + dep.tau + 1.0) / dep.b).powf(1.0 / dep.gamma);
    e32 * pow2 / geo.h0.powf(d2 * (dep.tau + 1.0)) * spacing.powf(dep.tau * d - d2 * (dep.tau + 1.0))
}

pub fn thresholds_theorem1(
    dep: &DependenceParams,
    geo: &GeometryParams,
    ceiling: u64,
) -> Result<Theorem1Thresholds, BoundError> {
    let d = geo.d as f64;
    let d1 = geo.d1 as f64;
    let d2 = geo.d2 as f64;
    let c1 = c1_constant(dep, geo);
    let exponent = (dep.tau * d - d2 * (dep.tau + 1.0)) / dep.gamma;
    let n1_pred = |n: u64| -> bool {
        let nf = n as f64;
        let arg = geo.h0.powf(d2 - d1) * nf / 2f64.powf(d2);
        let log = log_base(dep.nu, arg);
        if log <= 0.0 {
            return false;
        }
        log.powf(exponent) / nf.powf(dep.kappa + dep.beta) <= 1.0 / c1
    };
    let n1 = monotone_min_n(1, ceiling, n1_pred)?;

    let n2_rhs = geo.c0 / geo.h0.powf(d2)
        * dep
            .nu
            .powf(dep.b * geo.h0.powf(dep.gamma) / (2.0 * (dep.kappa + dep.beta) + dep.tau + 1.0));
    let n2 = monotone_min_n(1, ceiling, |n| n as f64 >= n2_rhs)?;

    let n_floor = (floor_tol(geo.h0.powf(d2 - d1) / 2f64.powf(d2)).max(1.0)) as u64;
    Ok(Theorem1Thresholds {
        n1,
        n2,
        n_floor,
        n0: n1.max(n2).max(n_floor),
    })
}

/// Thresholds of the VC uniform-deviation bound at threshold `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VcThresholds {
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    /// `N* = N0 v N1 v N2`.
    pub n_star: u64,
}

/// Dudley-style entropy integral of the VC threshold `N0`:
/// integral over `u` in `[t/(16A), 1/2]` of
/// `sqrt(V log(3 (8e/u^2) log(12e/u^2)))`.
pub fn vc_entropy_integral(a: f64, v: f64, t: f64) -> f64 {
    let lo = t / (16.0 * a);
    let hi = 0.5;
    if lo >= hi {
        return 0.0;
    }
    let f = |u: f64| -> f64 {
        let e = std::f64::consts::E;
        (v * (3.0 * (8.0 * e / (u * u)) * (12.0 * e / (u * u)).ln()).ln()).sqrt()
    };
    // Simpson's rule.
    let m = 2000usize;
    let h = (hi - lo) / m as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..m {
        let u = lo + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(u);
    }
    acc * h / 3.0
}

pub fn thresholds_vc(
    dep: &DependenceParams,
    geo: &GeometryParams,
    a: f64,
    v: f64,
    t: f64,
    ceiling: u64,
) -> Result<VcThresholds, BoundError> {
    if t <= 0.0 {
        return Err(BoundError::NonPositiveT(t));
    }
    let integral = vc_entropy_integral(a, v, t);
    let n0 = monotone_min_n(1, ceiling, |n| (n as f64).sqrt() * t >= 48.0 * a * integral)?;
    let n1 = monotone_min_n(1, ceiling, |n| (n as f64).sqrt() * t >= 36.0 * a)?;
    let k2 = k2_constant(dep, geo);
    let rhs = 4.0 * k2 * 8f64.ln() * geo.c0 * a * (geo.c0 * a + 8.0 * t / 3.0) / (t * t);
    let d2g = geo.d2 as f64 / dep.gamma;
    let n2 = monotone_min_n(2, ceiling, |n| {
        let nf = n as f64;
        nf / nf.ln().powf(d2g) >= rhs
    })?;
    Ok(VcThresholds {
        n0,
        n1,
        n2,
        n_star: n0.max(n1).max(n2),
    })
}
