//! Batches of independent trials and the statistics drawn from them.

use rayon::prelude::*;
use serde::Serialize;

use super::geometry::{sample_realization, Window};
use super::trial::{measure_downlink, measure_uplink, TrialOutcome};
use super::{trial_rng, Estimate};
use crate::config::{Scenario, SimulationConfig};
use crate::error::{Error, Result};

/// Outcomes of a batch, in trial order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSet {
    pub seed: u64,
    pub window: Window,
    pub rate_cap_nats: f64,
    pub outcomes: Vec<TrialOutcome>,
}

/// Runs `trials` independent realizations of the scenario. Trial `i` draws
/// from stream `i` of `seed`.
pub fn run_trials(scenario: &Scenario, trials: usize, seed: u64) -> Result<TrialSet> {
    scenario.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trials", "must be positive"));
    }
    let net = &scenario.network;
    let sim: &SimulationConfig = &scenario.simulation;
    let window = match sim.window_radius_m {
        Some(r) => Window::with_radius(net, r)?,
        None => Window::for_network(net)?,
    };
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let r = sample_realization(net, &window, &mut rng)?;
            let mut o = measure_downlink(&r, net, &scenario.swipt, sim.near_field, t, &mut rng)?;
            o.gamma_ul = measure_uplink(&r, net, sim.near_field, &mut rng)?;
            Ok(o)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSet {
        seed,
        window,
        rate_cap_nats: sim.rate_cap_nats,
        outcomes,
    })
}

/// `P(X ≤ θ)` at each `θ`, with binomial standard errors.
pub fn empirical_cdf(samples: &[f64], thetas: &[f64]) -> Vec<Estimate> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    thetas
        .iter()
        .map(|&t| Estimate::proportion(sorted.partition_point(|&x| x <= t), sorted.len()))
        .collect()
}

impl TrialSet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn harvested_power(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.p_eh).collect()
    }

    pub fn harvested_power_cdf(&self, thetas: &[f64]) -> Vec<Estimate> {
        empirical_cdf(&self.harvested_power(), thetas)
    }

    pub fn mean_received_power(&self) -> Estimate {
        Estimate::from_samples(self.outcomes.iter().map(|o| o.p_dl))
    }

    pub fn mean_harvested_energy(&self) -> Estimate {
        Estimate::from_samples(self.outcomes.iter().map(|o| o.e_eh))
    }

    /// `P(P_eh < threshold)`.
    pub fn outage_energy_harvesting(&self, threshold: f64) -> Estimate {
        let hits = self.outcomes.iter().filter(|o| o.p_eh < threshold).count();
        Estimate::proportion(hits, self.len())
    }

    /// `P(E_eh < need)`, with `need` the uplink energy `(1-β)τQ`.
    pub fn outage_self_powered(&self, need: f64) -> Estimate {
        let hits = self.outcomes.iter().filter(|o| o.e_eh < need).count();
        Estimate::proportion(hits, self.len())
    }

    fn capped_rate(&self, gamma: f64) -> f64 {
        gamma.ln_1p().min(self.rate_cap_nats)
    }

    /// `E[ln(1+γ_dl)]`, nats/Hz.
    pub fn downlink_rate(&self) -> Estimate {
        Estimate::from_samples(self.outcomes.iter().map(|o| self.capped_rate(o.gamma_dl)))
    }

    /// `E[ln(1+γ_ul)]`, nats/Hz.
    pub fn uplink_rate(&self) -> Estimate {
        Estimate::from_samples(self.outcomes.iter().map(|o| self.capped_rate(o.gamma_ul)))
    }

    /// Share of trials whose uplink rate hit the cap.
    pub fn uplink_capped_fraction(&self) -> f64 {
        let hits = self
            .outcomes
            .iter()
            .filter(|o| o.gamma_ul.ln_1p() >= self.rate_cap_nats)
            .count();
        hits as f64 / self.len() as f64
    }

    /// Share of trials whose downlink rate hit the cap.
    pub fn downlink_capped_fraction(&self) -> f64 {
        let hits = self
            .outcomes
            .iter()
            .filter(|o| o.gamma_dl.ln_1p() >= self.rate_cap_nats)
            .count();
        hits as f64 / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_counts_ties_as_below() {
        let e = empirical_cdf(&[1.0, 2.0, 2.0, 3.0], &[0.5, 2.0, 3.0]);
        let v: Vec<f64> = e.iter().map(|x| x.mean).collect();
        assert_eq!(v, vec![0.0, 0.75, 1.0]);
    }
}
