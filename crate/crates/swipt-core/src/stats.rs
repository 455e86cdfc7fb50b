use serde::Serialize;

use crate::cell_load::nonvoid_prob;
use crate::config::NetworkConfig;
use crate::error::Result;

/// Per-tier association statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TierStats {
    /// Mean number of users per BS, `ℓ_m`.
    pub cell_load: f64,
    /// Probability the BS is non-void, `q_m`.
    pub nonvoid_prob: f64,
    /// Probability a user associates with the tier, `ϑ_m`.
    pub association_prob: f64,
}

/// Quantities derived from a [`NetworkConfig`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkStats {
    /// `λ_Σ = Σ_m w_m^{2/α} λ_m`, per square meter.
    pub lambda_sigma: f64,
    /// Intensity of scheduled uplink users, `Σ_m q_m λ_m`.
    pub scheduled_user_intensity: f64,
    pub tiers: Vec<TierStats>,
}

impl NetworkStats {
    /// Copy with every BS non-void (the infinite-load limit).
    pub fn with_full_load(&self) -> NetworkStats {
        let mut out = self.clone();
        for t in &mut out.tiers {
            t.nonvoid_prob = 1.0;
        }
        out
    }

    /// Copy with the non-void probabilities replaced.
    pub fn with_nonvoid_probs(&self, q: &[f64]) -> NetworkStats {
        let mut out = self.clone();
        for (t, &v) in out.tiers.iter_mut().zip(q) {
            t.nonvoid_prob = v;
        }
        out
    }
}

/// Computes `ℓ_m`, `q_m`, `ϑ_m`, `λ_Σ` and `μ_s`.
pub fn derive_stats(net: &NetworkConfig) -> Result<NetworkStats> {
    net.validate()?;
    let lambda_sigma = net.lambda_sigma();
    let tiers: Vec<TierStats> = (0..net.tiers.len())
        .map(|m| {
            let wf = net.weight_factor(m);
            let cell_load = wf * net.user_intensity / lambda_sigma;
            TierStats {
                cell_load,
                nonvoid_prob: nonvoid_prob(cell_load),
                association_prob: wf * net.tiers[m].intensity / lambda_sigma,
            }
        })
        .collect();
    let scheduled_user_intensity = tiers
        .iter()
        .zip(&net.tiers)
        .map(|(s, t)| s.nonvoid_prob * t.intensity)
        .sum();
    Ok(NetworkStats {
        lambda_sigma,
        scheduled_user_intensity,
        tiers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{two_tier_reference, TierConfig};

    fn single_tier(w: f64) -> NetworkConfig {
        NetworkConfig {
            tiers: vec![TierConfig {
                transmit_power: 5.0,
                intensity: 3e-6,
                antennas: 2,
                association_weight: w,
                hardware_power: 0.0,
            }],
            user_intensity: 3e-6,
            pathloss_exponent: 3.0,
            noise_power: 0.0,
        }
    }

    #[test]
    fn single_tier_normalization() {
        for w in [1.0, 7.0, 0.01] {
            let s = derive_stats(&single_tier(w)).unwrap();
            assert!((s.tiers[0].cell_load - 1.0).abs() < 1e-12);
            assert!((s.tiers[0].association_prob - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_tier_association_probabilities() {
        let s = derive_stats(&two_tier_reference(4.0).network).unwrap();
        let a = 40f64.sqrt();
        let b = 50.0 * 10f64.sqrt();
        assert!((s.tiers[0].association_prob - a / (a + b)).abs() < 1e-12);
        assert!((s.tiers[0].association_prob - 0.0385).abs() < 1e-4);
        assert!((s.tiers[1].association_prob - 0.9615).abs() < 1e-4);
        assert!((s.lambda_sigma - (a + b) * 1e-6).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_network() {
        let mut n = single_tier(1.0);
        n.pathloss_exponent = 2.0;
        assert!(derive_stats(&n).is_err());
        let mut n = single_tier(1.0);
        n.tiers[0].intensity = 0.0;
        assert!(derive_stats(&n).is_err());
    }

    #[test]
    fn full_load_saturates() {
        assert!((nonvoid_prob(1e6) - 1.0).abs() < 1e-6);
        assert_eq!(nonvoid_prob(0.0), 0.0);
    }
}
