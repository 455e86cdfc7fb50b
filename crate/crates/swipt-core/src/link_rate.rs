//! Ergodic downlink and uplink rates, in nats/Hz.
//!
//! Both rates use `E[ln(1+X/Y)] = ∫_0^∞ (1 - E[e^{-sX}]) E[e^{-sY}] ds/s` with
//! the serving fading in `X`. As in the harvested-power bounds, non-void BSs
//! are treated as an independent thinning, so the results are lower bounds
//! that are exact at full load.
//!
//! The `s`-integrals are evaluated in `t = ln s` and split where the integrand
//! changes regime: `s P_m/w_m = 1` for the downlink and `s Q = 1` for the
//! uplink. The integrand decays like `e^{t}` on the left and like `e^{-2t/α}`
//! on the right, so both halves converge quickly.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harvest::{phi, tier_exponent, HarvestParams};
use crate::specfun::{erfcx, quad_half_line, QuadSpec};

const RATE_QUAD: QuadSpec = QuadSpec {
    abs_tol: 1e-11,
    rel_tol: 1e-10,
    max_subdivisions: 4000,
    truncation_threshold: 1e-12,
};

const INNER_QUAD: QuadSpec = QuadSpec {
    abs_tol: 1e-13,
    rel_tol: 1e-11,
    max_subdivisions: 2000,
    truncation_threshold: 1e-12,
};

/// Downlink and uplink rates in nats/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePair {
    pub c_dl: f64,
    pub c_ul: f64,
    /// Whether the values are lower bounds (finite cell load) rather than
    /// exact.
    pub lower_bound: bool,
}

impl RatePair {
    pub fn dl_bits(&self) -> f64 {
        self.c_dl / LN_2
    }

    pub fn ul_bits(&self) -> f64 {
        self.c_ul / LN_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fading {
    /// Gamma with `N_m` shape.
    Gamma,
    /// `N_m → ∞`.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Path {
    Auto,
    General,
    Erfcx,
}

/// `1 - (1 + x/n)^{-n}` without cancellation for small `x`.
fn gain_bracket(x: f64, n: f64) -> f64 {
    -(-n * (x / n).ln_1p()).exp_m1()
}

/// `∫_0^∞ f(s) ds` as `∫ f(e^t) e^t dt` split at `s0`; `right_rate` is the
/// decay rate of `s f(s)` in `t` beyond the split.
fn integrate_log<F: FnMut(f64) -> f64>(mut f: F, s0: f64, right_rate: f64) -> Result<f64> {
    let t0 = s0.ln();
    let left = quad_half_line(
        |tau| {
            let s = (t0 - tau).exp();
            if s == 0.0 {
                return 0.0;
            }
            f(s) * s
        },
        0.0,
        1.0,
        &RATE_QUAD,
    )?;
    let right = quad_half_line(
        |tau| {
            let s = (t0 + tau).exp();
            if s.is_infinite() {
                return 0.0;
            }
            f(s) * s
        },
        0.0,
        1.0 / right_rate,
        &RATE_QUAD,
    )?;
    Ok(left.value + right.value)
}

/// `1 + Σ_k Φ_k(1, s)` with the raw power ratios `P_k/w_k`.
fn downlink_exponent(p: &HarvestParams, s: f64) -> f64 {
    1.0 + (0..p.tier_count())
        .map(|k| tier_exponent(p, k, 1.0, s * p.power_ratio(k)))
        .sum::<f64>()
}

/// `E_x[πλ_Σ e^{-πλ_Σ x E(s) - s(σ²/ρ) x^{α/2}}]` integrated over `x`.
fn serving_distance_factor(p: &HarvestParams, s: f64, path: Path) -> Result<f64> {
    let pl = p.pi_lambda();
    let a = pl * downlink_exponent(p, s);
    let noise = s * p.network.noise_power / p.swipt.power_split;
    if noise == 0.0 {
        return Ok(pl / a);
    }
    let alpha = p.alpha();
    let use_erfcx = match path {
        Path::Auto => alpha == 4.0,
        Path::Erfcx => true,
        Path::General => false,
    };
    if use_erfcx {
        if alpha != 4.0 {
            return Err(Error::Domain {
                function: "downlink_rate_erfcx",
                detail: format!("requires α = 4, got {alpha}"),
            });
        }
        let root = noise.sqrt();
        return Ok(pl * PI.sqrt() / (2.0 * root) * erfcx(a / (2.0 * root)));
    }
    // y = A x turns the exponential part into e^{-y}.
    let b = noise * a.powf(-alpha / 2.0);
    let scale = b.powf(-2.0 / alpha).min(1.0);
    let r = quad_half_line(|y| (-y - b * y.powf(alpha / 2.0)).exp(), 0.0, scale, &INNER_QUAD)?;
    Ok(pl / a * r.value)
}

fn downlink(p: &HarvestParams, fading: Fading, path: Path) -> Result<f64> {
    let max_ratio = (0..p.tier_count()).map(|m| p.power_ratio(m)).fold(0.0, f64::max);
    let mut failure = None;
    let value = integrate_log(
        |s| {
            let bracket: f64 = (0..p.tier_count())
                .map(|m| {
                    let x = s * p.power_ratio(m);
                    let b = match fading {
                        Fading::Gamma => gain_bracket(x, p.network.tiers[m].antennas as f64),
                        Fading::Unbounded => -(-x).exp_m1(),
                    };
                    p.stats.tiers[m].association_prob * b
                })
                .sum();
            match serving_distance_factor(p, s, path) {
                Ok(k) => bracket * k / s,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        1.0 / max_ratio,
        2.0 / p.alpha(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    value
}

fn check_split(p: &HarvestParams) -> Result<()> {
    let rho = p.swipt.power_split;
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("power_split", format!("must lie in (0, 1), got {rho}")))
    }
}

/// Lower bound on `E[ln(1 + γ_dl)]`. Uses the interference-limited single
/// integral when `σ² = 0`, the `erfcx` kernel when `α = 4`, and a nested
/// integral otherwise.
pub fn downlink_rate(p: &HarvestParams) -> Result<f64> {
    check_split(p)?;
    downlink(p, Fading::Gamma, Path::Auto)
}

/// [`downlink_rate`] through the nested integral regardless of `α`.
pub fn downlink_rate_general(p: &HarvestParams) -> Result<f64> {
    check_split(p)?;
    downlink(p, Fading::Gamma, Path::General)
}

/// [`downlink_rate`] through the `erfcx` kernel; requires `α = 4`.
pub fn downlink_rate_erfcx(p: &HarvestParams) -> Result<f64> {
    check_split(p)?;
    downlink(p, Fading::Gamma, Path::Erfcx)
}

/// Lower bound on `E[ln(1 + γ_ul)]` with serving gain `Gamma(N_m, 1)`.
///
/// The scheduled users are treated as a PPP of intensity `Σ q_m λ_m` seen
/// in the association domain of the serving BS.
pub fn uplink_rate(p: &HarvestParams) -> Result<f64> {
    check_split(p)?;
    let q = p.swipt.user_power;
    let alpha = p.alpha();
    let mut failure = None;
    let value = integrate_log(
        |s| {
            let mut denom = 1.0;
            for k in 0..p.tier_count() {
                let tier = &p.network.tiers[k];
                let z = s * q * tier.association_weight / (p.scale() * tier.transmit_power);
                match phi(k, 1.0, z, p) {
                    Ok(v) => denom += tier.association_weight.powf(-2.0 / alpha) * v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return f64::NAN;
                    }
                }
            }
            let bracket: f64 = (0..p.tier_count())
                .map(|m| {
                    let tier = &p.network.tiers[m];
                    p.stats.tiers[m].association_prob
                        * gain_bracket(s * q / tier.association_weight * tier.antennas as f64, tier.antennas as f64)
                })
                .sum();
            bracket / (s * denom)
        },
        1.0 / q,
        2.0 / alpha,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    value
}

/// Both rates at the given settings.
pub fn rates(p: &HarvestParams) -> Result<RatePair> {
    Ok(RatePair {
        c_dl: downlink_rate(p)?,
        c_ul: uplink_rate(p)?,
        lower_bound: p.stats.tiers.iter().any(|t| t.nonvoid_prob < 1.0),
    })
}

/// Rates as every `N_m → ∞` under max-power association.
///
/// The downlink serving gain hardens to its unit mean. The uplink gain
/// `Gamma(N_m, 1)` has mean `N_m`, so the uplink rate grows without bound and
/// is reported as `+∞`.
pub fn rate_limits_infinite_antennas(p: &HarvestParams) -> Result<RatePair> {
    check_split(p)?;
    if !p.network.is_max_power_association() {
        return Err(Error::invalid(
            "association_weight",
            "antenna limits are defined for max-power association (w_m = P_m)",
        ));
    }
    Ok(RatePair {
        c_dl: downlink(p, Fading::Unbounded, Path::Auto)?,
        c_ul: f64::INFINITY,
        lower_bound: p.stats.tiers.iter().any(|t| t.nonvoid_prob < 1.0),
    })
}
