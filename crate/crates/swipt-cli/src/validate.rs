//! Invariant suite run by `swipt validate`.

use std::f64::consts::PI;

use swipt_core::cell_load::{pmf_truncation_index, user_count_pmf};
use swipt_core::curve::log_grid;
use swipt_core::energy_eff::{optimize, Branch};
use swipt_core::harvest::{
    harvested_power_cdf, harvested_power_cdf_alpha4, harvested_power_cdf_inverted,
    harvested_power_cdf_limit_fullload, harvested_power_cdf_lowest_limit, mean_harvested_energy,
    outage_energy_harvesting, outage_self_powered, HarvestParams,
};
use swipt_core::link_rate::{downlink_rate_erfcx, downlink_rate_general, rates};
use swipt_core::montecarlo::{run_trials, Estimate};
use swipt_core::specfun::{erfcx, upper_incomplete_gamma};
use swipt_core::{derive_stats, Scenario};

use crate::commands::{simulate_point, sweep_points, Job, RunReport};
use crate::output::{Cell, Output, Records};
use crate::CliError;

pub const VALIDATE_TRIALS: usize = 10_000;
/// Fewest trials at which the heavy-tailed energy sample mean is checked.
const MEAN_ENERGY_MIN_TRIALS: usize = 10_000;
/// Standard errors allowed between a simulated value and its analytic counterpart.
const SE_SLACK: f64 = 4.0;

struct Suite {
    checks: Vec<(String, bool, String)>,
}

impl Suite {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push((name.to_string(), passed, detail));
    }

    /// Records a numerical error as a failed check.
    fn attempt(&mut self, name: &str, f: impl FnOnce() -> swipt_core::Result<(bool, String)>) {
        match f() {
            Ok((passed, detail)) => self.check(name, passed, detail),
            Err(e) => self.check(name, false, format!("error: {e}")),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn analytic_checks(s: &Scenario, suite: &mut Suite) -> Result<HarvestParams, CliError> {
    let p = HarvestParams::from_scenario(s)?;
    let st = derive_stats(&s.network)?;

    let total: f64 = st.tiers.iter().map(|t| t.association_prob).sum();
    let ranges = st.tiers.iter().all(|t| t.nonvoid_prob > 0.0 && t.nonvoid_prob <= 1.0);
    suite.check(
        "stats",
        (total - 1.0).abs() < 1e-12 && ranges,
        format!("association probabilities sum to {total:.15}"),
    );

    let mut worst = 0.0f64;
    for t in &st.tiers {
        let n = pmf_truncation_index(t.cell_load, 1e-13);
        let (mass, mean) = (0..=n).fold((0.0, 0.0), |(m, e), k| {
            let q = user_count_pmf(t.cell_load, k);
            (m + q, e + k as f64 * q)
        });
        worst = worst.max((mass - 1.0).abs()).max(rel(mean, t.cell_load));
    }
    suite.check("user_count_pmf", worst < 1e-8, format!("worst mass or mean error {worst:.1e}"));

    suite.attempt("incomplete_gamma_recurrence", || {
        let mut worst = 0.0f64;
        for a in [-2.5, -1.0, -0.5, 0.3, 1.7, 3.0] {
            for b in [0.05, 0.5, 2.0, 10.0] {
                let lhs = upper_incomplete_gamma(a + 1.0, b)?;
                let rhs = a * upper_incomplete_gamma(a, b)? + b.powf(a) * (-b).exp();
                worst = worst.max(rel(lhs, rhs));
            }
        }
        Ok((worst < 1e-9, format!("worst relative error {worst:.1e}")))
    });

    // erfcx solves y' = 2xy - 2/√π.
    let mut worst = 0.0f64;
    for x in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let h = 1e-4 * x;
        let slope = (erfcx(x + h) - erfcx(x - h)) / (2.0 * h);
        worst = worst.max(rel(slope, 2.0 * x * erfcx(x) - 2.0 / PI.sqrt()));
    }
    let big: f64 = 1e4;
    let asym = (1.0 - 0.5 / (big * big) + 0.75 / big.powi(4)) / (big * PI.sqrt());
    worst = worst.max(rel(erfcx(big), asym));
    suite.check("erfcx", worst < 1e-6, format!("worst relative error {worst:.1e}"));

    suite.attempt("harvest_cdf_order", || {
        let thetas = log_grid(1e-7, 1e-2, 11)?;
        let (mut ok, mut prev) = (true, 0.0);
        for &theta in &thetas {
            let f = harvested_power_cdf(theta, &p)?;
            let full = harvested_power_cdf_limit_fullload(theta, &p)?;
            let lowest = harvested_power_cdf_lowest_limit(theta, &p)?;
            ok &= (0.0..=1.0).contains(&f) && f >= prev - 1e-6 && f >= full - 1e-6 && full >= lowest - 1e-6;
            prev = f;
        }
        Ok((ok, "bound monotone in θ and above the full-load and lowest limits".into()))
    });

    if s.network.pathloss_exponent == 4.0 {
        suite.attempt("harvest_cdf_closed_form", || {
            let mut worst = 0.0f64;
            for theta in log_grid(1e-6, 1e-3, 7)? {
                worst = worst.max((harvested_power_cdf_alpha4(theta, &p)? - harvested_power_cdf_inverted(theta, &p)?).abs());
            }
            Ok((worst < 1e-4, format!("closed form vs inversion, worst gap {worst:.1e}")))
        });
        suite.attempt("downlink_rate_erfcx", || {
            let noise = if s.network.noise_power > 0.0 { s.network.noise_power } else { 1e-6 };
            let q = HarvestParams::new(s.network.with_noise_power(noise), s.swipt.clone())?;
            let (a, b) = (downlink_rate_erfcx(&q)?, downlink_rate_general(&q)?);
            Ok((rel(a, b) < 1e-3, format!("σ² = {noise:e}: {a:.6} vs {b:.6}")))
        });
    }

    suite.attempt("outage_order", || {
        let full = p.with_full_load();
        let (eh, eh_full) = (outage_energy_harvesting(&p)?, outage_energy_harvesting(&full)?);
        let (ps, ps_full) = (outage_self_powered(&p)?, outage_self_powered(&full)?);
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = unit(eh) && unit(ps) && eh >= eh_full - 1e-9 && ps >= ps_full - 1e-9;
        Ok((ok, format!("ε_eh {eh:.4} (full {eh_full:.4}), ε_ps {ps:.4} (full {ps_full:.4})")))
    });

    suite.attempt("rate_order", || {
        let r = rates(&p)?;
        let f = rates(&p.with_full_load())?;
        let heavier = HarvestParams::new(s.network.with_cell_load(0, 2.0 * st.tiers[0].cell_load), s.swipt.clone())?;
        let h = rates(&heavier)?;
        let ok = r.c_dl >= f.c_dl && r.c_ul >= f.c_ul && h.c_dl < r.c_dl && h.c_ul < r.c_ul;
        Ok((
            ok,
            format!(
                "c_dl {:.4} ≥ full {:.4}, c_ul {:.4} ≥ full {:.4}, both fall when the load doubles",
                r.c_dl, f.c_dl, r.c_ul, f.c_ul
            ),
        ))
    });

    match optimize(&p) {
        Ok(r) if r.branch == Branch::Infeasible => {
            suite.check("ee_optimum", true, "no feasible split; nothing to check".into())
        }
        Ok(r) => suite.check(
            "ee_optimum",
            r.feasible_sets.rho.contains(r.rho_star) && r.zeta_star >= r.grid_max * (1.0 - 1e-9),
            format!(
                "ρ* {:.4}, β* {:.4}, ζ* {:.5e} ≥ grid {:.5e}",
                r.rho_star, r.beta_star, r.zeta_star, r.grid_max
            ),
        ),
        Err(e @ swipt_core::Error::Infeasible(_)) => {
            suite.check("ee_optimum", true, format!("{e}; nothing to check"))
        }
        Err(e) => suite.check("ee_optimum", false, format!("error: {e}")),
    }
    Ok(p)
}

fn simulation_checks(s: &Scenario, p: &HarvestParams, job: &Job, suite: &mut Suite, log: &mut Vec<serde_json::Value>) -> Result<(), CliError> {
    let set = simulate_point(s, job, "validate".into(), log)?;
    let below = |a: f64, e: Estimate| a <= e.mean + SE_SLACK * e.std_err;
    let shown = |e: Estimate| format!("{:.5} ± {:.5}", e.mean, e.std_err);

    suite.attempt("mc_mean_energy", || {
        if set.len() < MEAN_ENERGY_MIN_TRIALS {
            return Ok((true, format!("skipped below {MEAN_ENERGY_MIN_TRIALS} trials")));
        }
        let want = mean_harvested_energy(p)?;
        let e = set.mean_harvested_energy();
        let tol = SE_SLACK * e.std_err + set.window.tail_fraction * want;
        Ok(((e.mean - want).abs() <= tol, format!("MC {:.4e} ± {:.1e} vs {want:.4e}", e.mean, e.std_err)))
    });
    suite.attempt("mc_outage", || {
        let sw = &s.swipt;
        let need = (1.0 - sw.downlink_fraction) * sw.slot_duration * sw.user_power;
        let (eh, ps) = (outage_energy_harvesting(p)?, outage_self_powered(p)?);
        let (m_eh, m_ps) = (set.outage_energy_harvesting(sw.min_harvest_power), set.outage_self_powered(need));
        Ok((
            below(eh, m_eh) && below(ps, m_ps),
            format!("ε_eh {eh:.4} vs MC {}, ε_ps {ps:.4} vs MC {}", shown(m_eh), shown(m_ps)),
        ))
    });
    suite.attempt("mc_rates", || {
        let r = rates(p)?;
        let (dl, ul) = (set.downlink_rate(), set.uplink_rate());
        Ok((
            below(r.c_dl, dl) && below(r.c_ul, ul),
            format!("c_dl {:.4} vs MC {}, c_ul {:.4} vs MC {}", r.c_dl, shown(dl), r.c_ul, shown(ul)),
        ))
    });

    let n = job.trials.min(200);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::Numerics(format!("thread pool: {e}")))?
        .install(|| run_trials(s, n, job.seed))?;
    suite.check(
        "mc_determinism",
        single.outcomes[..] == set.outcomes[..n],
        format!("first {n} trials identical on one thread"),
    );
    Ok(())
}

pub fn validate(job: &Job) -> Result<RunReport, CliError> {
    let points: Vec<(Option<f64>, Scenario)> = match sweep_points(job, None)? {
        Some((sweep, scenarios)) => sweep.values.into_iter().map(Some).zip(scenarios).collect(),
        None => vec![(None, job.scenario.clone())],
    };
    let column = job.sweep.as_ref().map(|s| s.field.column());
    let mut records = Records::new(column.iter().cloned().chain(["check", "passed", "detail"].map(String::from)));
    let mut log = Vec::new();
    let mut failed = Vec::new();
    for (x, s) in points {
        let mut suite = Suite { checks: Vec::new() };
        let p = analytic_checks(&s, &mut suite)?;
        if job.trials > 0 {
            simulation_checks(&s, &p, job, &mut suite, &mut log)?;
        }
        for (name, passed, detail) in suite.checks {
            if !passed {
                failed.push(match x {
                    Some(v) => format!("{name} at {v}"),
                    None => name.clone(),
                });
            }
            let mut row: Vec<Cell> = x.map(Cell::from).into_iter().collect();
            row.extend([name.into(), passed.into(), detail.into()]);
            records.push(row);
        }
    }
    let mut report = RunReport::with_log(Output::Records(records), log);
    if !failed.is_empty() {
        report.failure = Some(format!("failed checks: {}", failed.join(", ")));
    }
    Ok(report)
}
