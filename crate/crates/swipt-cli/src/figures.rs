//! Data behind each published figure.

use clap::ValueEnum;
use serde_json::Value;
use swipt_core::curve::{linear_grid, log_grid, CurveKind};
use swipt_core::energy_eff::{energy_efficiency, feasible_sets};
use swipt_core::harvest::{
    harvested_power_cdf, harvested_power_cdf_limit_fullload, harvested_power_cdf_lowest_limit,
    self_sustainability_check, HarvestParams,
};
use swipt_core::Scenario;

use crate::commands::{default_load_sweep, outage, rate_table, simulate_point, Job, Link, RunReport, TableBuilder};
use crate::sweep::{Field, SweepSpec};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Harvested-power CDF per load, sparse deployment.
    #[value(name = "2a")]
    F2a,
    /// Harvested-power CDF per load, five times denser deployment.
    #[value(name = "2b")]
    F2b,
    /// Outage probabilities vs the tier-1 load.
    #[value(name = "3a")]
    F3a,
    /// Outage probabilities vs the tier-2 load.
    #[value(name = "3b")]
    F3b,
    /// Downlink rate vs the tier-1 load.
    #[value(name = "4a")]
    F4a,
    /// Uplink rate vs the tier-1 load.
    #[value(name = "4b")]
    F4b,
    /// Energy efficiency vs the power split for three downlink fractions.
    #[value(name = "5a")]
    F5a,
    /// Energy efficiency over the (power split, downlink fraction) grid.
    #[value(name = "5b")]
    F5b,
}

/// Loads at which the CDF figures are drawn.
pub const CDF_LOADS: [f64; 3] = [0.5, 2.0, 8.0];
/// Intensity factor of the dense CDF figure.
pub const DENSE_FACTOR: f64 = 5.0;
pub const EE_BETAS: [f64; 3] = [0.3, 0.4, 0.55];

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::F2a => "2a",
            Figure::F2b => "2b",
            Figure::F3a => "3a",
            Figure::F3b => "3b",
            Figure::F4a => "4a",
            Figure::F4b => "4b",
            Figure::F5a => "5a",
            Figure::F5b => "5b",
        }
    }

    /// Bundled profile used when no config is given.
    pub fn default_profile(self) -> &'static str {
        match self {
            Figure::F2a | Figure::F2b | Figure::F3a | Figure::F3b => "table1",
            _ => "table1-alpha2.5",
        }
    }

    /// Trials per simulated point when `--trials` is absent.
    pub fn default_trials(self) -> usize {
        match self {
            Figure::F2a | Figure::F2b | Figure::F3a | Figure::F3b => 10_000,
            Figure::F4a | Figure::F4b => 1_000,
            Figure::F5a | Figure::F5b => 0,
        }
    }
}

pub fn reproduce(figure: Figure, job: &Job) -> Result<RunReport, CliError> {
    if job.sweep.is_some() {
        return Err(CliError::Config("reproduce-figure fixes its own abscissa; drop --sweep".into()));
    }
    match figure {
        Figure::F2a => cdf_figure(job, &job.scenario),
        Figure::F2b => {
            let net = job.scenario.network.with_scaled_intensities(DENSE_FACTOR);
            cdf_figure(job, &job.scenario.with_network(net))
        }
        Figure::F3a => outage(&with_sweep(job, Field::CellLoad(0))),
        Figure::F3b => outage(&with_sweep(job, Field::CellLoad(1))),
        Figure::F4a | Figure::F4b => {
            let link = if figure == Figure::F4a { Link::Downlink } else { Link::Uplink };
            let sweep = default_load_sweep();
            let scenarios = scenarios_along(job, &sweep)?;
            rate_table(job, &sweep, &scenarios, &[link], true)
        }
        Figure::F5a => efficiency_curves(&job.scenario, &linear_grid(0.05, 0.95, 91)?, &EE_BETAS),
        Figure::F5b => {
            let grid = linear_grid(0.05, 0.95, 19)?;
            efficiency_curves(&job.scenario, &grid, &grid)
        }
    }
}

fn with_sweep(job: &Job, field: Field) -> Job {
    let mut sweep = default_load_sweep();
    sweep.field = field;
    Job {
        sweep: Some(sweep),
        ..job.clone()
    }
}

fn scenarios_along(job: &Job, sweep: &SweepSpec) -> Result<Vec<Scenario>, CliError> {
    sweep.values.iter().map(|&v| sweep.field.apply(&job.scenario, v)).collect()
}

/// CDF bound at each load in [`CDF_LOADS`], the two limits, and the
/// simulated CDF at each load.
fn cdf_figure(job: &Job, base: &Scenario) -> Result<RunReport, CliError> {
    let thetas = log_grid(1e-7, 1e-2, 101)?;
    let mut t = TableBuilder::new("theta_w", thetas.clone());
    let mut log: Vec<Value> = Vec::new();
    let mut limits = None;
    for &load in &CDF_LOADS {
        let s = Field::CellLoad(0).apply(base, load)?;
        let p = HarvestParams::from_scenario(&s)?;
        let eval = |f: fn(f64, &HarvestParams) -> swipt_core::Result<f64>| -> Result<Vec<f64>, CliError> {
            Ok(thetas.iter().map(|&x| f(x, &p)).collect::<Result<Vec<_>, _>>()?)
        };
        t.cdf(format!("cdf_bound_load{load}"), CurveKind::AnalyticalLowerBound, eval(harvested_power_cdf)?);
        if limits.is_none() {
            limits = Some((
                eval(harvested_power_cdf_limit_fullload)?,
                eval(harvested_power_cdf_lowest_limit)?,
            ));
        }
        if job.trials > 0 {
            let set = simulate_point(&s, job, format!("cell_load_tier1={load}"), &mut log)?;
            t.empirical(format!("cdf_mc_load{load}"), &set.harvested_power_cdf(&thetas), true);
        }
    }
    let (full, lowest) = limits.expect("at least one load");
    t.cdf("cdf_full_load", CurveKind::AnalyticalLimit, full);
    t.cdf("cdf_lowest_limit", CurveKind::AnalyticalLimit, lowest);
    Ok(RunReport::with_log(t.finish(), log))
}

/// `ζ(ρ, β)` in bits per joule, one column per `β`, each followed by a 0/1
/// column marking the points that meet the outage cap and self-sustainability.
fn efficiency_curves(s: &Scenario, rhos: &[f64], betas: &[f64]) -> Result<RunReport, CliError> {
    let p = HarvestParams::from_scenario(s)?;
    let sets = match feasible_sets(&p) {
        Ok(f) => Some(f),
        Err(swipt_core::Error::Infeasible(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut t = TableBuilder::new("power_split", rhos.to_vec());
    for &beta in betas {
        let mut zeta = Vec::with_capacity(rhos.len());
        let mut feasible = Vec::with_capacity(rhos.len());
        for &rho in rhos {
            zeta.push(energy_efficiency(rho, beta, &p)?);
            let ok = match &sets {
                Some(f) if rho >= f.rho.lo && rho <= f.rho_outage_max && beta <= s.swipt.beta_max => {
                    self_sustainability_check(&p.with_swipt(s.swipt.with_split(rho, beta))?)?.sustainable
                }
                _ => false,
            };
            feasible.push(if ok { 1.0 } else { 0.0 });
        }
        let label = fmt_short(beta);
        t.curve(format!("zeta_beta{label}"), CurveKind::Analytical, zeta);
        t.curve(format!("feasible_beta{label}"), CurveKind::Analytical, feasible);
    }
    Ok(RunReport::new(t.finish()))
}

/// Two-decimal label without trailing zeros.
fn fmt_short(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
