//! Monte Carlo simulation of the network, used as ground truth for the
//! analytical results.
//!
//! Every trial draws from its own ChaCha8 stream keyed by (seed, trial
//! index), and results are collected in trial order, so output does not
//! depend on the number of threads.

mod cell_load;
mod experiment;
mod geometry;
mod shot_noise;
mod trial;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use cell_load::{chi_square_test, palm_user_counts, ChiSquare};
pub use experiment::{empirical_cdf, run_trials, TrialSet};
pub use geometry::{sample_realization, BaseStation, NetworkRealization, Window, MAX_WINDOW_BS, MIN_BS_PER_TIER, TAIL_TARGET};
pub use shot_noise::{draw_shot_noise, sample_shot_noise, ShotNoiseDraw, EXPLICIT_TERMS};
pub use trial::{measure_downlink, measure_uplink, TrialOutcome};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// The generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Estimate {
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for x in samples {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let std_err = if n > 1 { (m2 / (n - 1) as f64 / n as f64).sqrt() } else { f64::NAN };
        Estimate { mean, std_err, n }
    }

    /// A proportion with its binomial standard error.
    pub fn proportion(hits: usize, n: usize) -> Estimate {
        let p = hits as f64 / n as f64;
        Estimate {
            mean: p,
            std_err: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    pub fn ci95(&self) -> f64 {
        Z95 * self.std_err
    }

    /// Whether `value` lies within `k` standard errors.
    pub fn agrees(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let e = Estimate::from_samples(xs);
        let m = xs.iter().sum::<f64>() / 5.0;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 4.0;
        assert!((e.mean - m).abs() < 1e-15);
        assert!((e.std_err - (v / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn streams_differ_and_repeat() {
        use rand::Rng;
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        let c: u64 = trial_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
