//! Supremum of `|P_N(A) - P(A)|` over intervals.
//!
//! Endpoints range over the order statistics (each open or closed) together
//! with the unbounded sides; the extremes are separable in the two
//! endpoints, so a prefix scan computes the exact supremum of that family in
//! O(N) after sorting. With `G(x) = F_N(x) - F(x)` and `G-(x)` its left
//! limit, an interval contributes `R(right) - L(left)` where `R` is `G` or
//! `G-` at the right endpoint (closed/open) and `L` likewise at the left.

/// Exact supremum over the interval family described above. `cdf` must be
/// the (continuous) truth distribution function.
pub fn sup_interval_deviation(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sample.is_empty(), "sample must be non-empty");
    let n = sample.len();
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    // g[j] = (j+1)/n - F(x_j), gm[j] = j/n - F(x_j).
    let g: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(j, &x)| (j + 1) as f64 / nf - cdf(x))
        .collect();
    let gm: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(j, &x)| j as f64 / nf - cdf(x))
        .collect();

    // sup (P_N - P): right endpoint closed maximizes R, left closed
    // minimizes L; the prefix minimum of gm (and 0 for an unbounded left)
    // pairs with each right endpoint.
    let mut d_plus = 0.0f64;
    let mut premin = 0.0f64;
    for j in 0..n {
        d_plus = d_plus.max(g[j] - premin);
        premin = premin.min(gm[j]);
    }
    d_plus = d_plus.max(-premin);

    // sup (P - P_N): open endpoints, so the roles of g and gm swap.
    let mut d_minus = 0.0f64;
    let mut premax = 0.0f64;
    for j in 0..n {
        d_minus = d_minus.max(premax - gm[j]);
        premax = premax.max(g[j]);
    }
    d_minus = d_minus.max(premax);

    d_plus.max(d_minus).max(0.0)
}
