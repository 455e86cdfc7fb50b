use std::f64::consts::PI;

use swipt_core::cell_load::{association_distance_cdf, nonvoid_prob};
use swipt_core::config::two_tier_reference;
use swipt_core::montecarlo::{
    chi_square_test, palm_user_counts, run_trials, sample_realization, sample_shot_noise, trial_rng, Estimate, Window,
};
use swipt_core::shot_noise::{shotnoise_mean, MarkModel};
use swipt_core::Scenario;

fn light_scenario() -> Scenario {
    let s = two_tier_reference(4.0);
    s.with_network(s.network.with_cell_load(0, 0.5))
}

#[test]
fn base_station_counts_are_poisson() {
    let s = light_scenario();
    let w = Window::for_network(&s.network).unwrap();
    let area = PI * w.bs_radius().powi(2);
    let counts: Vec<Vec<f64>> = (0..200u64)
        .map(|t| {
            let r = sample_realization(&s.network, &w, &mut trial_rng(3, t)).unwrap();
            (0..2).map(|m| r.bs.iter().filter(|b| b.tier == m).count() as f64).collect()
        })
        .collect();
    for m in 0..2 {
        let want = s.network.tiers[m].intensity * area;
        let e = Estimate::from_samples(counts.iter().map(|c| c[m]));
        assert!(e.agrees(want, 4.0), "tier {m}: {} ± {} vs {want}", e.mean, e.std_err);
        // Poisson: variance equals mean.
        let var = e.std_err.powi(2) * e.n as f64;
        assert!((var / want - 1.0).abs() < 0.3, "tier {m}: variance {var} vs {want}");
    }
}

#[test]
fn weighted_association_distance_is_exponential() {
    let s = light_scenario();
    let net = &s.network;
    let w = Window::for_network(net).unwrap();
    let n = 10_000u64;
    let mut d: Vec<f64> = (0..n)
        .map(|t| {
            let r = sample_realization(net, &w, &mut trial_rng(11, t)).unwrap();
            let b = r.bs[r.serving()];
            (b.pos[0].powi(2) + b.pos[1].powi(2)) / net.weight_factor(b.tier)
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let lambda_sigma = net.lambda_sigma();
    let ks = d
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = association_distance_cdf(x, lambda_sigma);
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.02, "KS distance {ks}");
}

#[test]
fn scheduled_users_match_nonvoid_intensity() {
    let s = two_tier_reference(4.0);
    let net = &s.network;
    let w = Window::for_network(net).unwrap();
    let area = PI * w.radius.powi(2);
    let want: f64 = (0..2)
        .map(|m| {
            let load = net.weight_factor(m) * net.user_intensity / net.lambda_sigma();
            nonvoid_prob(load) * net.tiers[m].intensity
        })
        .sum();
    let e = Estimate::from_samples((0..200u64).map(|t| {
        let r = sample_realization(net, &w, &mut trial_rng(5, t)).unwrap();
        let active = (0..r.bs.len()).filter(|&b| r.active_region(b) && r.scheduled[b].is_some()).count();
        active as f64 / area
    }));
    // The gamma approximation of cell areas is good to a few percent.
    assert!((e.mean / want - 1.0).abs() < 0.03, "{} vs {want}", e.mean);
}

#[test]
fn doubling_trials_shrinks_error_by_root_two() {
    let s = light_scenario();
    let a = run_trials(&s, 4000, 21).unwrap().downlink_rate();
    let b = run_trials(&s, 8000, 21).unwrap().downlink_rate();
    let ratio = b.std_err / a.std_err;
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn zero_trials_is_an_error() {
    let s = light_scenario();
    assert!(run_trials(&s, 0, 1).is_err());
    assert!(palm_user_counts(&s.network, 0, 0, 1).is_err());
    assert!(sample_shot_noise(1, 1e-4, 4.0, &MarkModel::unit_exponential(), 0, 1).is_err());
}

#[test]
fn same_seed_same_outcomes_on_any_pool() {
    let s = light_scenario();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_trials(&s, 300, 99).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_ne!(one.outcomes, run_trials(&s, 300, 100).unwrap().outcomes);
}

#[test]
fn shot_noise_mean_matches_campbell() {
    let marks = MarkModel::unit_exponential();
    let lambda = 0.05;
    for n in [1, 2] {
        let draws = sample_shot_noise(n, lambda, 4.0, &marks, 20_000, 8).unwrap();
        let e = Estimate::from_samples(draws.iter().map(|d| d.value));
        let want = shotnoise_mean(n, lambda, 4.0, &marks).unwrap();
        assert!(e.agrees(want, 4.0), "n = {n}: {} ± {} vs {want}", e.mean, e.std_err);
    }
}

#[test]
fn palm_counts_pass_chi_square() {
    let s = two_tier_reference(4.0);
    let counts = palm_user_counts(&s.network, 1, 2000, 4).unwrap();
    let load = s.network.weight_factor(1) * s.network.user_intensity / s.network.lambda_sigma();
    let t = chi_square_test(&counts, load).unwrap();
    assert!(t.p_value > 0.001, "{t:?}");
}

#[test]
fn palm_void_fraction_matches_windowed_count() {
    let s = two_tier_reference(4.0);
    let net = &s.network;
    let w = Window::for_network(net).unwrap();
    let inner = 0.5 * w.radius;
    let (mut void, mut total) = ([0usize; 2], [0usize; 2]);
    for t in 0..300u64 {
        let r = sample_realization(net, &w, &mut trial_rng(17, t)).unwrap();
        for (b, bs) in r.bs.iter().enumerate() {
            if bs.pos[0].hypot(bs.pos[1]) < inner {
                total[bs.tier] += 1;
                void[bs.tier] += r.is_void(b) as usize;
            }
        }
    }
    for m in 0..2 {
        let windowed = Estimate::proportion(void[m], total[m]);
        let counts = palm_user_counts(net, m, 4000, 2).unwrap();
        let palm = Estimate::proportion(counts.iter().filter(|&&c| c == 0).count(), counts.len());
        let se = windowed.std_err.hypot(palm.std_err);
        assert!((windowed.mean - palm.mean).abs() < 4.0 * se, "tier {m}: {windowed:?} vs {palm:?}");
    }
}
