//! Users per BS seen from a typical BS.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::geometry::{sample_with_extra_bs, Window};
use super::trial_rng;
use crate::cell_load::user_count_pmf;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// Mean number of competing BSs left in the region that could still contain
/// the typical cell; `e^{-30}` bounds the chance a far user belongs to it.
const CELL_REACH: f64 = 30.0;

/// Number of users associated with a tier-`tier` BS placed at the origin,
/// one count per trial.
pub fn palm_user_counts(net: &NetworkConfig, tier: usize, trials: usize, seed: u64) -> Result<Vec<u32>> {
    net.validate()?;
    if tier >= net.tiers.len() {
        return Err(Error::invalid("tier", format!("no tier {}", tier + 1)));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be positive"));
    }
    // A user at distance d joins the origin cell only if no tier-k BS lies
    // within d √(w_k/w_m)^{2/α}; those regions hold πλ_Σ d² w_m^{-2/α} BSs.
    let wm = net.weight_factor(tier);
    let user_radius = (CELL_REACH * wm / (PI * net.lambda_sigma())).sqrt();
    let stretch = (0..net.tiers.len())
        .map(|k| (net.weight_factor(k) / wm).sqrt())
        .fold(0.0, f64::max);
    let bs_radius = user_radius * (1.0 + stretch);
    let window = Window {
        radius: user_radius,
        margin: 0.0,
        tail_fraction: f64::NAN,
    };
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let r = sample_with_extra_bs(net, &window, user_radius, bs_radius, Some(tier), &mut rng)?;
            let b = r
                .bs
                .iter()
                .position(|b| b.tier == tier)
                .expect("the origin BS is the first of its tier");
            Ok(r.user_counts[b])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins as (first count, observed, expected); the last bin is open.
    pub bins: Vec<(u32, usize, f64)>,
}

/// Pearson test of observed users-per-BS counts against the negative
/// binomial law of the given cell load. Bins with expected count below 5
/// are merged into the open tail bin.
pub fn chi_square_test(counts: &[u32], load: f64) -> Result<ChiSquare> {
    let n = counts.len();
    if n == 0 {
        return Err(Error::invalid("counts", "empty sample"));
    }
    let total = n as f64;
    let mut bins = Vec::new();
    let mut cum = 0.0;
    let mut k = 0u32;
    loop {
        let e = user_count_pmf(load, k as u64) * total;
        let tail_after = (1.0 - cum - e / total) * total;
        if e < 5.0 || tail_after < 5.0 {
            break;
        }
        let obs = counts.iter().filter(|&&c| c == k).count();
        bins.push((k, obs, e));
        cum += e / total;
        k += 1;
    }
    let obs_tail = counts.iter().filter(|&&c| c >= k).count();
    bins.push((k, obs_tail, (1.0 - cum) * total));
    if bins.len() < 2 {
        return Err(Error::invalid("counts", "too few trials for a chi-square test"));
    }
    let statistic = bins.iter().map(|&(_, o, e)| (o as f64 - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Simulation(format!("chi-square law: {e}")))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        bins,
    })
}
