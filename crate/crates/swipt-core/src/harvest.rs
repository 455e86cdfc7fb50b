//! Harvested power at the typical user.
//!
//! The user splits off a fraction `1-ρ` of its received downlink power and
//! converts it with efficiency `η`, so `P_eh = η(1-ρ) P_dl`. Interference from
//! non-void BSs is modeled by thinning each tier with its non-void probability
//! `q_m` and ignoring the correlation of the thinned points, which yields lower
//! bounds on the transform and the CDF that become exact as every `q_m → 1`.
//!
//! Distances are handled in the association domain `x = w_m^{-2/α}|B|²`, where
//! the serving point is exponential with rate `πλ_Σ` regardless of its tier.

use std::cell::Cell;
use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{NetworkConfig, Scenario, SwiptConfig};
use crate::error::{Error, Result};
use crate::specfun::{
    interference_tail, invert, quad, quad_half_line, upper_incomplete_gamma, Inverter, QuadSpec,
};
use crate::stats::{derive_stats, NetworkStats};

const CDF_QUAD: QuadSpec = QuadSpec {
    abs_tol: 1e-11,
    rel_tol: 1e-9,
    max_subdivisions: 4000,
    truncation_threshold: 1e-12,
};

const PSI_TERMS: usize = 41;
const PSI_SETTLE: f64 = 1e-6;

/// A network, its derived statistics and the receiver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestParams {
    pub network: NetworkConfig,
    pub stats: NetworkStats,
    pub swipt: SwiptConfig,
}

/// Fading law of the serving link: Gamma(`N_m`, `1/N_m`) or its `N_m → ∞`
/// limit, a unit constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ServingGain {
    Gamma,
    Hardened,
}

impl HarvestParams {
    pub fn new(network: NetworkConfig, swipt: SwiptConfig) -> Result<Self> {
        swipt.validate()?;
        let stats = derive_stats(&network)?;
        Ok(HarvestParams { network, stats, swipt })
    }

    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        HarvestParams::new(scenario.network.clone(), scenario.swipt.clone())
    }

    /// Same network with every BS non-void.
    pub fn with_full_load(&self) -> Self {
        HarvestParams {
            stats: self.stats.with_full_load(),
            ..self.clone()
        }
    }

    pub fn with_swipt(&self, swipt: SwiptConfig) -> Result<Self> {
        swipt.validate()?;
        Ok(HarvestParams { swipt, ..self.clone() })
    }

    /// `η(1-ρ)`.
    pub fn scale(&self) -> f64 {
        self.swipt.harvest_scale()
    }

    pub(crate) fn alpha(&self) -> f64 {
        self.network.alpha()
    }

    /// `P_m / w_m`.
    pub(crate) fn power_ratio(&self, m: usize) -> f64 {
        let t = &self.network.tiers[m];
        t.transmit_power / t.association_weight
    }

    pub(crate) fn pi_lambda(&self) -> f64 {
        PI * self.stats.lambda_sigma
    }

    pub(crate) fn tier_count(&self) -> usize {
        self.network.tiers.len()
    }

    fn check_tier(&self, m: usize) -> Result<()> {
        if m < self.tier_count() {
            Ok(())
        } else {
            Err(Error::invalid("tier", format!("index {m} out of range")))
        }
    }

    /// Mean serving-link gain factor at association distance `u`, with unit
    /// transform argument.
    fn serving_factor(&self, m: usize, u: f64, gain: ServingGain) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let x = self.scale() * self.power_ratio(m) / u.powf(self.alpha() / 2.0);
        match gain {
            ServingGain::Gamma => {
                let n = self.network.tiers[m].antennas as f64;
                (-n * (x / n).ln_1p()).exp()
            }
            ServingGain::Hardened => (-x).exp(),
        }
    }

    /// `Σ_k Φ_k(u, 1)`.
    fn interference_exponent(&self, u: f64) -> f64 {
        (0..self.tier_count())
            .map(|k| phi_unchecked(self, k, u, 1.0))
            .sum()
    }
}

fn phi_unchecked(p: &HarvestParams, m: usize, y: f64, z: f64) -> f64 {
    tier_exponent(p, m, y, p.scale() * z * p.power_ratio(m))
}

/// `ϑ_m q_m c^{2/α} ∫_{y/c^{2/α}}^∞ dt/(1 + t^{α/2})` for an effective power
/// ratio `c`.
pub(crate) fn tier_exponent(p: &HarvestParams, m: usize, y: f64, c: f64) -> f64 {
    let alpha = p.alpha();
    let tier = &p.stats.tiers[m];
    let weight = tier.association_prob * tier.nonvoid_prob;
    if weight == 0.0 {
        return 0.0;
    }
    let c = c.powf(2.0 / alpha);
    weight * c * interference_tail(y / c, alpha).expect("exponent validated with the network")
}

/// `Φ_m(y, z) = ϑ_m q_m c^{2/α} ∫_{y/c^{2/α}}^∞ dt/(1 + t^{α/2})` with
/// `c = η(1-ρ) z P_m / w_m`: the interference exponent contributed by
/// tier `m` beyond association distance `y`.
pub fn phi(m: usize, y: f64, z: f64, p: &HarvestParams) -> Result<f64> {
    p.check_tier(m)?;
    if !(y >= 0.0) {
        return Err(Error::invalid("y", format!("must be nonnegative, got {y}")));
    }
    if !(z > 0.0) {
        return Err(Error::invalid("z", format!("must be positive, got {z}")));
    }
    Ok(phi_unchecked(p, m, y, z))
}

/// Lower bound on `E[e^{-s P_eh}]`.
pub fn harvested_power_laplace(s: f64, p: &HarvestParams) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", format!("must be positive and finite, got {s}")));
    }
    // With x = s^{2/α} u and t = πλ_Σ x the serving term integrates against
    // e^{-t}.
    let k = p.pi_lambda() * s.powf(2.0 / p.alpha());
    let integrand = |t: f64| {
        let u = t / k;
        let exponent = t + k * p.interference_exponent(u);
        let serving: f64 = (0..p.tier_count())
            .map(|m| p.stats.tiers[m].association_prob * p.serving_factor(m, u, ServingGain::Gamma))
            .sum();
        serving * (-exponent).exp()
    };
    let r = quad_half_line(integrand, 0.0, 1.0, &CDF_QUAD)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Lower bound on `P[P_eh ≤ θ]`. Uses [`harvested_power_cdf_alpha4`] when
/// `α = 4` and numerical inversion otherwise.
pub fn harvested_power_cdf(theta: f64, p: &HarvestParams) -> Result<f64> {
    check_theta(theta)?;
    if p.alpha() == 4.0 {
        alpha4(theta, p, ServingGain::Gamma)
    } else {
        general(theta, p, ServingGain::Gamma)
    }
}

/// The general-exponent path, also at `α = 4`.
pub fn harvested_power_cdf_inverted(theta: f64, p: &HarvestParams) -> Result<f64> {
    check_theta(theta)?;
    general(theta, p, ServingGain::Gamma)
}

/// Closed-kernel CDF bound for `α = 4`.
pub fn harvested_power_cdf_alpha4(theta: f64, p: &HarvestParams) -> Result<f64> {
    check_theta(theta)?;
    alpha4(theta, p, ServingGain::Gamma)
}

/// CDF with every BS non-void, the limit of the bound as all cell loads grow.
/// It is exact in that limit.
pub fn harvested_power_cdf_limit_fullload(theta: f64, p: &HarvestParams) -> Result<f64> {
    harvested_power_cdf(theta, &p.with_full_load())
}

/// Full-load CDF with unboundedly many antennas per BS, so the serving gain
/// hardens to its mean. Under max-power association this is the lowest CDF
/// any load or array size can reach.
pub fn harvested_power_cdf_lowest_limit(theta: f64, p: &HarvestParams) -> Result<f64> {
    check_theta(theta)?;
    let full = p.with_full_load();
    if p.alpha() == 4.0 {
        alpha4(theta, &full, ServingGain::Hardened)
    } else {
        general(theta, &full, ServingGain::Hardened)
    }
}

/// Heavy-tail approximation `exp(-2πλ_Σ √(η(1-ρ)/θ))` of the lowest limit at
/// `α = 4` for `λ_Σ/√θ ≪ 1`, in its commonly quoted form.
///
/// Expanding the limit for small `b = πλ_Σ√(η(1-ρ))/(2√θ)` gives
/// `e^{-2b} = exp(-πλ_Σ √(η(1-ρ)/θ))`, so this form doubles the exponent.
/// Both tend to 1 in the regime where the approximation is used.
pub fn lowest_limit_heavy_tail(theta: f64, p: &HarvestParams) -> f64 {
    (-2.0 * p.pi_lambda() * (p.scale() / theta).sqrt()).exp()
}

/// `ε_eh = P[P_eh < P_eh_min]`.
pub fn outage_energy_harvesting(p: &HarvestParams) -> Result<f64> {
    harvested_power_cdf(p.swipt.min_harvest_power, p)
}

/// `ε_ps = P[β τ P_eh < (1-β) τ Q]`.
pub fn outage_self_powered(p: &HarvestParams) -> Result<f64> {
    let beta = p.swipt.downlink_fraction;
    harvested_power_cdf((1.0 - beta) * p.swipt.user_power / beta, p)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && !theta.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid("theta", format!("must be positive, got {theta}")))
    }
}

fn alpha4(theta: f64, p: &HarvestParams, gain: ServingGain) -> Result<f64> {
    if p.alpha() != 4.0 {
        return Err(Error::Domain {
            function: "harvested_power_cdf_alpha4",
            detail: format!("requires α = 4, got {}", p.alpha()),
        });
    }
    if theta.is_infinite() {
        return Ok(1.0);
    }
    let eff = p.scale();
    let b = p.pi_lambda() / (2.0 * theta.sqrt());
    let tiers: Vec<(f64, f64, f64, f64)> = (0..p.tier_count())
        .map(|m| {
            let t = &p.stats.tiers[m];
            let root = (eff * p.power_ratio(m)).sqrt();
            (t.association_prob, t.nonvoid_prob, root, p.network.tiers[m].antennas as f64)
        })
        .collect();
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        // π/2 - atan(v/(b r)) written as atan2 to keep the tail accurate.
        let phi_sum: f64 = tiers
            .iter()
            .map(|&(th, q, root, _)| th * q * root * (b * root).atan2(v))
            .sum();
        let gauss = (-(b * phi_sum + v).powi(2)).exp();
        let serving: f64 = tiers
            .iter()
            .map(|&(th, _, root, n)| {
                let x = (b * root / v).powi(2);
                th * match gain {
                    ServingGain::Gamma => (-n * (x / n).ln_1p()).exp(),
                    ServingGain::Hardened => (-x).exp(),
                }
            })
            .sum();
        FRAC_2_SQRT_PI * serving * gauss
    };
    // The serving factor switches on near v = b √(η(1-ρ)P/w).
    let knee = tiers.iter().map(|t| b * t.2).fold(0.0, f64::max);
    let head = quad(integrand, 0.0, knee, &CDF_QUAD)?;
    let tail = quad_half_line(integrand, knee, 1.0, &CDF_QUAD)?;
    Ok((head.value + tail.value).clamp(0.0, 1.0))
}

/// `G(κ) = L⁻¹{s^{a-1} e^{-κ s^a}}(1)` at two term counts.
fn psi_kernel(kappa: f64, a: f64) -> (f64, f64) {
    let f = |s: Complex64| (s.ln() * (a - 1.0) - kappa * s.powf(a)).exp();
    let fine = invert(f, 1.0, Inverter::Euler { terms: PSI_TERMS });
    let coarse = invert(f, 1.0, Inverter::Euler { terms: PSI_TERMS - 4 });
    (fine, coarse)
}

fn general(theta: f64, p: &HarvestParams, gain: ServingGain) -> Result<f64> {
    if theta.is_infinite() {
        return Ok(1.0);
    }
    // With a = 2/α the kernel obeys Ψ(θ, u) = θ^{-a} G(πλ_Σ A(u) θ^{-a}),
    // A(u) = u + Σ Φ_k(u, 1); substituting t = πλ_Σ u θ^{-a} leaves
    // F(θ) = Σ ϑ_m ∫ (serving factor) G(κ(t)) dt.
    let a = 2.0 / p.alpha();
    let theta_a = theta.powf(a);
    let pl = p.pi_lambda();
    let worst = Cell::new(0.0f64);
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let u = t * theta_a / pl;
        let kappa = t + pl * p.interference_exponent(u) / theta_a;
        let (g, g_coarse) = psi_kernel(kappa, a);
        worst.set(worst.get().max((g - g_coarse).abs()));
        let serving: f64 = (0..p.tier_count())
            .map(|m| p.stats.tiers[m].association_prob * p.serving_factor(m, u, gain))
            .sum();
        serving * g
    };
    let r = quad_half_line(integrand, 0.0, 1.0, &CDF_QUAD)?;
    if worst.get() > PSI_SETTLE {
        return Err(Error::Inversion {
            t: theta,
            a: r.value,
            b: worst.get(),
        });
    }
    Ok(r.value.clamp(0.0, 1.0))
}

/// Mean received downlink power `E[P_dl]` in watts: the serving link at
/// association distance at least one plus the non-void interferers beyond it.
pub fn mean_received_power(network: &NetworkConfig, stats: &NetworkStats) -> Result<f64> {
    let alpha = network.alpha();
    let pl = PI * stats.lambda_sigma;
    let s = 1.0 - alpha / 2.0;
    let near = upper_incomplete_gamma(s, pl)?;
    let mut total = 0.0;
    for (m, tier) in network.tiers.iter().enumerate() {
        let t = &stats.tiers[m];
        let th = t.association_prob;
        let q = t.nonvoid_prob;
        let far = if q == 0.0 {
            0.0
        } else {
            q * th.powf(alpha / 2.0 - 1.0) * upper_incomplete_gamma(s, pl * th)?
        };
        let braces = pl.powf(alpha / 2.0) * (near - far) + 2.0 / (alpha - 2.0) * q * pl * (-pl * th).exp();
        total += th * tier.transmit_power / tier.association_weight * braces;
    }
    Ok(total)
}

fn energy_prefactor(p: &HarvestParams) -> f64 {
    p.swipt.downlink_fraction * p.scale() * p.swipt.slot_duration
}

/// `E[E_eh] = β η(1-ρ) τ E[P_dl]` in joules.
pub fn mean_harvested_energy(p: &HarvestParams) -> Result<f64> {
    Ok(energy_prefactor(p) * mean_received_power(&p.network, &p.stats)?)
}

/// [`mean_harvested_energy`] under max-power association, where every
/// `P_m/w_m` is one. Fails for other weights.
pub fn mean_harvested_energy_mrpa(p: &HarvestParams) -> Result<f64> {
    if !p.network.is_max_power_association() {
        return Err(Error::invalid(
            "association_weight",
            "max-power association requires w_m = P_m",
        ));
    }
    mean_harvested_energy(p)
}

/// Small-`λ_Σ` approximation `βη(1-ρ)τ (2π/(α-2)) λ_Σ Σ ϑ_m q_m P_m/w_m`.
pub fn mean_harvested_energy_sparse(p: &HarvestParams) -> f64 {
    let sum: f64 = (0..p.tier_count())
        .map(|m| {
            let t = &p.stats.tiers[m];
            t.association_prob * t.nonvoid_prob * p.power_ratio(m)
        })
        .sum();
    energy_prefactor(p) * 2.0 * PI / (p.alpha() - 2.0) * p.stats.lambda_sigma * sum
}

/// The serving-link-only approximation `βη(1-ρ)τ (2π/(α-2)) λ_Σ Σ ϑ_m P_m/w_m`.
pub fn mean_harvested_energy_dense(p: &HarvestParams) -> f64 {
    let sum: f64 = (0..p.tier_count())
        .map(|m| p.stats.tiers[m].association_prob * p.power_ratio(m))
        .sum();
    energy_prefactor(p) * 2.0 * PI / (p.alpha() - 2.0) * p.stats.lambda_sigma * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sustainability {
    pub sustainable: bool,
    /// `E[E_eh] - (1-β)τQ` in joules.
    pub margin: f64,
}

/// Whether the mean harvested energy covers the uplink energy `(1-β)τQ`.
pub fn self_sustainability_check(p: &HarvestParams) -> Result<Sustainability> {
    let need = (1.0 - p.swipt.downlink_fraction) * p.swipt.slot_duration * p.swipt.user_power;
    let margin = mean_harvested_energy(p)? - need;
    Ok(Sustainability {
        sustainable: margin >= 0.0,
        margin,
    })
}
