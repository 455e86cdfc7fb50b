//! Energy efficiency of a power-splitting user and its maximization over the
//! power split `ρ` and downlink time fraction `β`.
//!
//! Efficiency is `[β c_dl + (1-β) c_ul] / (ln 2 · [β Σϑ_m P_m + Σϑ_m P_{m,on}
//! + (1-β) Q])` in bits per joule. For fixed rates it is a ratio of affine
//! functions of `β`, so it is monotone in `β` with the sign of
//! `c_dl - T c_ul`, where `T = 1 + Σϑ_m(P_m - Q)/(Σϑ_m P_{m,on} + Q)`.
//!
//! The constraints are an energy-harvesting outage cap `ε_eh(ρ) ≤ ε̄` and
//! self-sustainability `βη(1-ρ)τE[P_dl] ≥ (1-β)τQ`. The latter couples the two
//! variables: the smallest admissible `β` is
//! `β_lo(ρ) = Q / (Q + η(1-ρ)E[P_dl])`, which grows with `ρ`.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harvest::{mean_received_power, outage_energy_harvesting, HarvestParams};
use crate::link_rate::{downlink_rate, uplink_rate};

/// Interval tolerance of the bisections on `ρ`.
pub const RHO_TOL: f64 = 1e-4;
/// Points per axis of the verification grid.
pub const GRID_POINTS: usize = 50;
/// Slack allowed between the grid maximum and the returned optimum.
pub const GRID_SLACK: f64 = 1e-6;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `c_dl < T c_ul` somewhere: efficiency falls with `β`.
    UnderlineSet,
    /// `c_dl > T c_ul` somewhere: efficiency grows with `β`.
    OverlineSet,
    Infeasible,
    /// `c_dl = T c_ul` on all of `S_ρ`; efficiency does not depend on `β`.
    NeitherSetNonempty,
}

/// Feasible values of `ρ`, and of `β` at the smallest feasible `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibleSets {
    /// `S_ρ`: outage cap and sustainability at `β = β̄`, intersected with
    /// `[ρ_min, 1)`.
    pub rho: Interval,
    /// `S_β = [β_lo(ρ_min), β̄]`.
    pub beta: Interval,
    /// Largest `ρ` meeting the outage cap.
    pub rho_outage_max: f64,
    /// Largest `ρ` allowing sustainability at `β = β̄`.
    pub rho_sustain_max: f64,
    /// `E[P_dl]` in watts.
    pub mean_received_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EEResult {
    pub rho_star: f64,
    pub beta_star: f64,
    /// Bits per joule.
    pub zeta_star: f64,
    pub branch: Branch,
    pub feasible_sets: FeasibleSets,
    /// Downlink rate at `ρ*`, nats/Hz.
    pub c_dl: f64,
    /// Uplink rate, nats/Hz.
    pub c_ul: f64,
    /// `T`.
    pub ratio_threshold: f64,
    /// Largest efficiency on the verification grid.
    pub grid_max: f64,
}

/// Sign of `d/dx (a x + b)/(c x + d)`, which is that of `a d - b c`.
pub fn fractional_slope(a: f64, b: f64, c: f64, d: f64) -> Ordering {
    (a * d).partial_cmp(&(b * c)).unwrap_or(Ordering::Equal)
}

/// `T = 1 + Σϑ_m(P_m - Q)/(Σϑ_m P_{m,on} + Q)`.
pub fn ratio_threshold(p: &HarvestParams) -> f64 {
    let q = p.swipt.user_power;
    let (num, den) = p
        .network
        .tiers
        .iter()
        .zip(&p.stats.tiers)
        .fold((0.0, q), |(n, d), (t, s)| {
            (
                n + s.association_prob * (t.transmit_power - q),
                d + s.association_prob * t.hardware_power,
            )
        });
    1.0 + num / den
}

/// Efficiency for given rates (nats/Hz) at downlink fraction `beta`.
pub fn energy_efficiency_with_rates(beta: f64, c_dl: f64, c_ul: f64, p: &HarvestParams) -> f64 {
    let q = p.swipt.user_power;
    let (tx, on) = p
        .network
        .tiers
        .iter()
        .zip(&p.stats.tiers)
        .fold((0.0, 0.0), |(a, b), (t, s)| {
            (a + s.association_prob * t.transmit_power, b + s.association_prob * t.hardware_power)
        });
    (beta * c_dl + (1.0 - beta) * c_ul) / (LN_2 * (beta * tx + on + (1.0 - beta) * q))
}

fn check_unit(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn at_rho(p: &HarvestParams, rho: f64) -> Result<HarvestParams> {
    p.with_swipt(p.swipt.with_split(rho, p.swipt.downlink_fraction))
}

/// Efficiency in bits per joule at `(ρ, β)`.
pub fn energy_efficiency(rho: f64, beta: f64, p: &HarvestParams) -> Result<f64> {
    check_unit("power_split", rho)?;
    check_unit("downlink_fraction", beta)?;
    let q = at_rho(p, rho)?;
    Ok(energy_efficiency_with_rates(beta, downlink_rate(&q)?, uplink_rate(&q)?, p))
}

/// `β_lo(ρ) = Q / (Q + η(1-ρ)E[P_dl])`.
fn beta_floor(p: &HarvestParams, rho: f64, mean_dl: f64) -> f64 {
    let q = p.swipt.user_power;
    q / (q + p.swipt.conversion_efficiency * (1.0 - rho) * mean_dl)
}

/// Largest `ρ` in `[lo, hi]` with `pred(ρ)` true, assuming `pred` holds on an
/// initial segment and `pred(lo)`.
fn last_true<F: FnMut(f64) -> Result<bool>>(mut pred: F, lo: f64, hi: f64) -> Result<f64> {
    if pred(hi)? {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > RHO_TOL {
        let mid = 0.5 * (a + b);
        if pred(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

/// `S_ρ` and `S_β`; an empty set is an error.
pub fn feasible_sets(p: &HarvestParams) -> Result<FeasibleSets> {
    let s = &p.swipt;
    let rho_min = s.rho_min;
    let beta_max = s.beta_max;
    let mean_dl = mean_received_power(&p.network, &p.stats)?;
    let eta = s.conversion_efficiency;
    // βη(1-ρ)E ≥ (1-β)Q  ⇔  ρ ≤ 1 - (1-β)Q/(ηβE).
    let rho_sustain_max = 1.0 - (1.0 - beta_max) * s.user_power / (eta * beta_max * mean_dl);
    if rho_sustain_max < rho_min {
        return Err(Error::Infeasible(format!(
            "self-sustainability needs ρ ≤ {rho_sustain_max:.4} at β = {beta_max}, below ρ_min = {rho_min}"
        )));
    }
    let outage = |rho: f64| -> Result<f64> { outage_energy_harvesting(&at_rho(p, rho)?) };
    let eps_at_min = outage(rho_min)?;
    if eps_at_min > s.max_eh_outage {
        return Err(Error::Infeasible(format!(
            "harvesting outage {eps_at_min:.4} at ρ_min = {rho_min} exceeds the cap {}",
            s.max_eh_outage
        )));
    }
    let upper = rho_sustain_max.min(1.0 - RHO_TOL);
    let rho_outage_max = last_true(|rho| Ok(outage(rho)? <= s.max_eh_outage), rho_min, 1.0 - RHO_TOL)?;
    let hi = upper.min(rho_outage_max);
    Ok(FeasibleSets {
        rho: Interval { lo: rho_min, hi },
        beta: Interval {
            lo: beta_floor(p, rho_min, mean_dl),
            hi: beta_max,
        },
        rho_outage_max,
        rho_sustain_max,
        mean_received_power: mean_dl,
    })
}

/// Points of the coarse scan of the best-`β` profile over `S_ρ`.
const PROFILE_SCAN: usize = 65;
/// Tolerance of the golden-section refinement on `ρ`.
const PROFILE_TOL: f64 = 1e-7;

/// Maximizes the efficiency over the feasible set.
///
/// At fixed `ρ` the efficiency is monotone in `β` with the sign of
/// `c_dl - T c_ul`, so the best `β` is `β_lo(ρ)` on the underline set and
/// `β̄` on the overline set. Without noise `c_dl` does not depend on `ρ` and
/// the optimum is the infimum of the underline set or the supremum of the
/// overline set. With noise `c_dl` grows with `ρ` while `β_lo(ρ)` does too,
/// so the best-`β` profile is maximized over `S_ρ` by a scan followed by
/// golden-section refinement. The result is checked against a 50×50 grid
/// over the feasible region; a grid point beating it by more than
/// [`GRID_SLACK`] is an error.
pub fn optimize(p: &HarvestParams) -> Result<EEResult> {
    let sets = feasible_sets(p)?;
    let mean_dl = sets.mean_received_power;
    let beta_max = p.swipt.beta_max;
    let threshold = ratio_threshold(p);
    // The uplink bound does not involve ρ.
    let c_ul = uplink_rate(p)?;
    let c_dl_at = |rho: f64| -> Result<f64> { downlink_rate(&at_rho(p, rho)?) };
    let zeta = |beta: f64, c_dl: f64| energy_efficiency_with_rates(beta, c_dl, c_ul, p);
    // Best β at ρ with its branch and value.
    let profile = |rho: f64| -> Result<(Branch, f64, f64, f64)> {
        let c = c_dl_at(rho)?;
        let d = c - threshold * c_ul;
        let (branch, beta) = match d.partial_cmp(&0.0) {
            Some(Ordering::Less) => (Branch::UnderlineSet, beta_floor(p, rho, mean_dl)),
            Some(Ordering::Greater) => (Branch::OverlineSet, beta_max),
            _ => (Branch::NeitherSetNonempty, beta_floor(p, rho, mean_dl)),
        };
        Ok((branch, beta, c, zeta(beta, c)))
    };

    let (lo, hi) = (sets.rho.lo, sets.rho.hi);
    let at = |i: usize| lo + (hi - lo) * i as f64 / (PROFILE_SCAN - 1) as f64;
    let mut best_i = 0;
    let mut best = (lo, profile(lo)?);
    if hi > lo {
        for i in 1..PROFILE_SCAN {
            let v = profile(at(i))?;
            if v.3 > best.1 .3 {
                best_i = i;
                best = (at(i), v);
            }
        }
        // Refine between the scan neighbours of the best point.
        let (mut a, mut b) = (at(best_i.saturating_sub(1)), at((best_i + 1).min(PROFILE_SCAN - 1)));
        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut f1, mut f2) = (profile(x1)?, profile(x2)?);
        while b - a > PROFILE_TOL {
            if f1.3 >= f2.3 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = profile(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = profile(x2)?;
            }
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f.3 > best.1 .3 {
                best = (x, f);
            }
        }
    }
    let (rho_star, (branch, beta_star, c_dl, zeta_star)) = best;

    let grid_max = grid_maximum(p, &sets, &c_dl_at, &zeta)?;
    if grid_max.0 > zeta_star + GRID_SLACK {
        return Err(Error::GridVerification {
            rho: grid_max.1,
            beta: grid_max.2,
            grid: grid_max.0,
            found: zeta_star,
        });
    }
    Ok(EEResult {
        rho_star,
        beta_star,
        zeta_star,
        branch,
        feasible_sets: sets,
        c_dl,
        c_ul,
        ratio_threshold: threshold,
        grid_max: grid_max.0,
    })
}

/// Grid over `ρ ∈ S_ρ` and, per row, `β ∈ [β_lo(ρ), β̄]`. Returns the best
/// value and its location.
fn grid_maximum<C, Z>(p: &HarvestParams, sets: &FeasibleSets, c_dl_at: &C, zeta: &Z) -> Result<(f64, f64, f64)>
where
    C: Fn(f64) -> Result<f64>,
    Z: Fn(f64, f64) -> f64,
{
    let n = GRID_POINTS;
    let mut best = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
    for i in 0..n {
        let rho = sets.rho.lo + (sets.rho.hi - sets.rho.lo) * i as f64 / (n - 1) as f64;
        let c = c_dl_at(rho)?;
        let b_lo = beta_floor(p, rho, sets.mean_received_power);
        let b_hi = p.swipt.beta_max;
        if b_lo > b_hi {
            continue;
        }
        for j in 0..n {
            let beta = b_lo + (b_hi - b_lo) * j as f64 / (n - 1) as f64;
            let v = zeta(beta, c);
            if v > best.0 {
                best = (v, rho, beta);
            }
        }
    }
    Ok(best)
}
