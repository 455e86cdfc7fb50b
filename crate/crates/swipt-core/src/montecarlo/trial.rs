//! Received power, harvested energy and SINRs of the typical user in one
//! realization.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::Serialize;

use super::geometry::{dist2, norm2, NetworkRealization};
use crate::config::{NearField, NetworkConfig, SwiptConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub serving_tier: usize,
    /// Signal plus interference power at the user, W.
    pub p_dl: f64,
    /// `η(1-ρ) P_dl`, W.
    pub p_eh: f64,
    /// `βτ P_eh`, J.
    pub e_eh: f64,
    pub gamma_dl: f64,
    /// Uplink SIR at the serving BS; `+∞` when no other BS is scheduled.
    pub gamma_ul: f64,
}

/// Path gain `d^{-α}` with the near-field cutoff of the receiving or
/// transmitting BS.
pub(crate) struct PathLoss {
    half_alpha: f64,
    cutoff2: Vec<f64>,
}

impl PathLoss {
    pub(crate) fn new(net: &NetworkConfig, near_field: NearField) -> PathLoss {
        let cutoff2 = (0..net.tiers.len())
            .map(|m| match near_field {
                NearField::AssociationScaled => net.weight_factor(m),
                NearField::Physical => 1.0,
            })
            .collect();
        PathLoss {
            half_alpha: net.alpha() / 2.0,
            cutoff2,
        }
    }

    /// Gain at squared distance `d2` for a link ending at a tier-`m` BS.
    pub(crate) fn gain(&self, d2: f64, m: usize) -> f64 {
        if d2 < self.cutoff2[m] {
            0.0
        } else if self.half_alpha == 2.0 {
            1.0 / (d2 * d2)
        } else {
            d2.powf(-self.half_alpha)
        }
    }
}

fn gamma_gain(rng: &mut ChaCha8Rng, shape: f64, scale: f64) -> Result<f64> {
    let g = Gamma::new(shape, scale).map_err(|e| Error::Simulation(format!("Gamma({shape}, {scale}): {e}")))?;
    Ok(g.sample(rng))
}

/// Downlink quantities: serving gain `Gamma(N_m, 1/N_m)`, unit-mean
/// exponential gains from every other non-void BS in the window.
pub fn measure_downlink(
    r: &NetworkRealization,
    net: &NetworkConfig,
    swipt: &SwiptConfig,
    near_field: NearField,
    trial: u64,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    let pl = PathLoss::new(net, near_field);
    let serving = r.serving();
    let tier = r.bs[serving].tier;
    let n = net.tiers[tier].antennas as f64;
    let h = gamma_gain(rng, n, 1.0 / n)?;
    let signal = net.tiers[tier].transmit_power * h * pl.gain(norm2(r.bs[serving].pos), tier);
    let mut interference = 0.0;
    for (b, bs) in r.bs.iter().enumerate() {
        if b == serving || r.is_void(b) || !r.active_region(b) {
            continue;
        }
        let g: f64 = Exp1.sample(rng);
        interference += net.tiers[bs.tier].transmit_power * g * pl.gain(norm2(bs.pos), bs.tier);
    }
    let p_dl = signal + interference;
    let p_eh = swipt.harvest_scale() * p_dl;
    let noise = net.noise_power / swipt.power_split;
    let gamma_dl = if signal == 0.0 { 0.0 } else { signal / (interference + noise) };
    Ok(TrialOutcome {
        trial,
        serving_tier: tier,
        p_dl,
        p_eh,
        e_eh: swipt.downlink_fraction * swipt.slot_duration * p_eh,
        gamma_dl,
        gamma_ul: f64::NAN,
    })
}

/// Uplink SIR at the typical user's BS. The receive-beamforming gain is
/// `Gamma(N_m, 1)`; every other non-void BS in the window contributes its
/// scheduled user with a unit-mean exponential gain. `Q` cancels.
pub fn measure_uplink(
    r: &NetworkRealization,
    net: &NetworkConfig,
    near_field: NearField,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let pl = PathLoss::new(net, near_field);
    let serving = r.serving();
    let rx = r.bs[serving];
    let g = gamma_gain(rng, net.tiers[rx.tier].antennas as f64, 1.0)?;
    let signal = g * pl.gain(norm2(rx.pos), rx.tier);
    let mut interference = 0.0;
    for b in 0..r.bs.len() {
        if b == serving || !r.active_region(b) {
            continue;
        }
        if let Some(u) = r.scheduled[b] {
            let h: f64 = Exp1.sample(rng);
            interference += h * pl.gain(dist2(r.users[u as usize], rx.pos), rx.tier);
        }
    }
    Ok(if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::two_tier_reference;
    use crate::montecarlo::geometry::{sample_realization, Window};
    use rand::SeedableRng;

    #[test]
    fn harvest_identities_hold_exactly() {
        let s = two_tier_reference(4.0);
        let w = Window::for_network(&s.network).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 0..20 {
            let r = sample_realization(&s.network, &w, &mut rng).unwrap();
            let o = measure_downlink(&r, &s.network, &s.swipt, NearField::AssociationScaled, t, &mut rng).unwrap();
            assert_eq!(o.p_eh, s.swipt.harvest_scale() * o.p_dl);
            assert_eq!(o.e_eh, s.swipt.downlink_fraction * s.swipt.slot_duration * o.p_eh);
        }
    }

    #[test]
    fn lone_serving_bs_gives_signal_only() {
        let s = two_tier_reference(4.0);
        let w = Window::for_network(&s.network).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut r = sample_realization(&s.network, &w, &mut rng).unwrap();
        let serving = r.serving();
        for b in 0..r.bs.len() {
            if b != serving {
                r.user_counts[b] = 0;
                r.scheduled[b] = None;
            }
        }
        let o = measure_downlink(&r, &s.network, &s.swipt, NearField::AssociationScaled, 0, &mut rng).unwrap();
        assert!(o.gamma_dl.is_infinite() || o.p_dl == 0.0);
        assert_eq!(measure_uplink(&r, &s.network, NearField::AssociationScaled, &mut rng).unwrap(), f64::INFINITY);
    }

    #[test]
    fn physical_cutoff_differs_from_scaled() {
        let s = two_tier_reference(4.0);
        let a = PathLoss::new(&s.network, NearField::AssociationScaled);
        let b = PathLoss::new(&s.network, NearField::Physical);
        assert_eq!(a.gain(4.0, 0), 0.0);
        assert_eq!(b.gain(4.0, 0), 1.0 / 16.0);
    }
}
