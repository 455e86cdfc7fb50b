//! Users-per-cell statistics under weighted association.
//!
//! The number of users in a tier-`m` cell is modeled as negative binomial with
//! shape 7/2 and mean `ℓ_m`, the standard Gamma approximation of the Voronoi
//! cell area. Its zero mass gives the void probability.

use statrs::function::gamma::ln_gamma;

const SHAPE: f64 = 3.5;

/// Probability that a BS with cell load `load` is non-void,
/// `1 - (1 + 2ℓ/7)^{-7/2}`.
pub fn nonvoid_prob(load: f64) -> f64 {
    -(-SHAPE * (load / SHAPE).ln_1p()).exp_m1()
}

/// `P(n users)` for a cell with mean load `load`, evaluated in log space.
pub fn user_count_pmf(load: f64, n: u64) -> f64 {
    if load == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let r = load / SHAPE;
    let log_p = ln_gamma(nf + SHAPE) - ln_gamma(nf + 1.0) - ln_gamma(SHAPE) + nf * r.ln()
        - (nf + SHAPE) * r.ln_1p();
    log_p.exp()
}

/// Smallest `N` with `P(X > N) < tail` by the Chernoff bound on the
/// negative-binomial tail.
pub fn pmf_truncation_index(load: f64, tail: f64) -> u64 {
    if load == 0.0 {
        return 0;
    }
    let p = (load / SHAPE) / (1.0 + load / SHAPE);
    // ln P(X ≥ k) ≤ r ln(1-p) - r ln(r/(r+k)) - k ln(k/((r+k)p)) for k > ℓ.
    let bound = |k: f64| {
        SHAPE * (1.0 - p).ln() - SHAPE * (SHAPE / (SHAPE + k)).ln()
            - k * (k / ((SHAPE + k) * p)).ln()
    };
    let target = tail.ln();
    let mut k = load.ceil().max(1.0) + 1.0;
    while bound(k) >= target {
        k = (k * 1.25).ceil();
    }
    // Bisect back to the smallest integer satisfying the bound.
    let (mut lo, mut hi) = ((k / 1.25).floor().max(load.ceil()), k);
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if mid > load && bound(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi as u64
}

/// CDF of the weighted association distance `w_*^{-2/α} |B_*|²`.
pub fn association_distance_cdf(theta: f64, lambda_sigma: f64) -> f64 {
    -(-std::f64::consts::PI * lambda_sigma * theta).exp_m1()
}
