//! The analysis and simulation subcommands.

use serde_json::{json, Value};
use swipt_core::curve::{log_grid, CurveKind, CurveTable, Table};
use swipt_core::energy_eff::{optimize, EEResult};
use swipt_core::harvest::{
    harvested_power_cdf, harvested_power_cdf_limit_fullload, harvested_power_cdf_lowest_limit,
    mean_harvested_energy, mean_harvested_energy_dense, mean_harvested_energy_sparse, outage_energy_harvesting,
    outage_self_powered, HarvestParams,
};
use swipt_core::link_rate::rates;
use swipt_core::montecarlo::{run_trials, Estimate, TrialSet};
use swipt_core::{derive_stats, Scenario};

use crate::output::{Cell, Output, Records};
use crate::sweep::{Field, SweepSpec};
use crate::CliError;

/// Default abscissa of the load sweeps: tier-1 load from 0.25 to 64.
pub const LOAD_SWEEP: (f64, f64, usize) = (0.25, 64.0, 13);
/// Default CDF thresholds in watts, 40 points per decade.
pub const THETA_GRID: (f64, f64, usize) = (1e-7, 1e-2, 201);
pub const SIMULATE_TRIALS: usize = 10_000;

/// A resolved invocation.
#[derive(Debug, Clone)]
pub struct Job {
    pub scenario: Scenario,
    pub seed: u64,
    /// Trials per simulated point; 0 skips simulation.
    pub trials: usize,
    pub sweep: Option<SweepSpec>,
}

/// A command's result and what the manifest records about it.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: Output,
    pub simulation: Vec<Value>,
    /// Set when a validation check failed.
    pub failure: Option<String>,
}

impl RunReport {
    pub fn new(output: Output) -> RunReport {
        RunReport {
            output,
            simulation: Vec::new(),
            failure: None,
        }
    }

    pub fn with_log(output: Output, simulation: Vec<Value>) -> RunReport {
        RunReport {
            output,
            simulation,
            failure: None,
        }
    }
}

pub fn default_load_sweep() -> SweepSpec {
    let (lo, hi, n) = LOAD_SWEEP;
    SweepSpec::new(Field::CellLoad(0), log_grid(lo, hi, n).expect("static grid"))
}

/// The sweep's abscissa and the scenario at each point.
pub fn sweep_points(job: &Job, default: Option<SweepSpec>) -> Result<Option<(SweepSpec, Vec<Scenario>)>, CliError> {
    let Some(sweep) = job.sweep.clone().or(default) else {
        return Ok(None);
    };
    if sweep.field == Field::Theta {
        return Err(CliError::Config("theta can only be swept by harvest-cdf".into()));
    }
    let scenarios = sweep
        .values
        .iter()
        .map(|&v| sweep.field.apply(&job.scenario, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some((sweep, scenarios)))
}

fn required_points(job: &Job, default: SweepSpec) -> Result<(SweepSpec, Vec<Scenario>), CliError> {
    Ok(sweep_points(job, Some(default))?.expect("a default sweep is given"))
}

/// Columns over a shared abscissa.
pub struct TableBuilder {
    x: Vec<f64>,
    table: Table,
}

impl TableBuilder {
    pub fn new(abscissa: impl Into<String>, x: Vec<f64>) -> TableBuilder {
        TableBuilder {
            x,
            table: Table::new(abscissa),
        }
    }

    pub fn curve(&mut self, name: impl Into<String>, kind: CurveKind, values: Vec<f64>) {
        self.table.push(CurveTable::new(name, kind, self.x.clone(), values));
    }

    pub fn cdf(&mut self, name: impl Into<String>, kind: CurveKind, values: Vec<f64>) {
        self.table.push(CurveTable::new(name, kind, self.x.clone(), values).as_cdf());
    }

    pub fn empirical(&mut self, name: impl Into<String>, est: &[Estimate], is_cdf: bool) {
        let c = CurveTable::new(name, CurveKind::Empirical, self.x.clone(), est.iter().map(|e| e.mean).collect())
            .with_ci(est.iter().map(Estimate::ci95).collect());
        self.table.push(if is_cdf { c.as_cdf() } else { c });
    }

    pub fn finish(self) -> Output {
        Output::Table(self.table)
    }
}

/// Runs the batch for one point and records its window in the report.
pub fn simulate_point(
    s: &Scenario,
    job: &Job,
    label: String,
    log: &mut Vec<Value>,
) -> Result<TrialSet, CliError> {
    let set = run_trials(s, job.trials, job.seed)?;
    log.push(json!({
        "point": label,
        "trials": set.len(),
        "window": set.window,
        "downlink_capped_fraction": set.downlink_capped_fraction(),
        "uplink_capped_fraction": set.uplink_capped_fraction(),
    }));
    Ok(set)
}

fn params(s: &Scenario) -> Result<HarvestParams, CliError> {
    Ok(HarvestParams::from_scenario(s)?)
}

fn uplink_energy(s: &Scenario) -> f64 {
    let w = &s.swipt;
    (1.0 - w.downlink_fraction) * w.slot_duration * w.user_power
}

pub fn stats(job: &Job) -> Result<RunReport, CliError> {
    let points = sweep_points(job, None)?;
    let mut columns: Vec<String> = Vec::new();
    if let Some((sweep, _)) = &points {
        columns.push(sweep.field.column());
    }
    columns.extend(
        [
            "tier",
            "name",
            "cell_load",
            "nonvoid_prob",
            "association_prob",
            "lambda_sigma_per_km2",
            "scheduled_user_intensity_per_km2",
        ]
        .map(String::from),
    );
    let mut out = Records::new(columns);
    let rows: Vec<(Option<f64>, Scenario)> = match points {
        Some((sweep, scenarios)) => sweep.values.into_iter().map(Some).zip(scenarios).collect(),
        None => vec![(None, job.scenario.clone())],
    };
    for (x, s) in rows {
        let st = derive_stats(&s.network)?;
        for (m, t) in st.tiers.iter().enumerate() {
            let mut row: Vec<Cell> = x.map(Cell::from).into_iter().collect();
            row.extend([
                Cell::from(m + 1),
                Cell::from(s.tier_names[m].as_str()),
                t.cell_load.into(),
                t.nonvoid_prob.into(),
                t.association_prob.into(),
                (st.lambda_sigma * 1e6).into(),
                (st.scheduled_user_intensity * 1e6).into(),
            ]);
            out.push(row);
        }
    }
    Ok(RunReport::new(Output::Records(out)))
}

pub fn harvest_cdf(job: &Job) -> Result<RunReport, CliError> {
    let thetas = match &job.sweep {
        Some(s) if s.field == Field::Theta => {
            if s.values[0] <= 0.0 {
                return Err(CliError::Config("theta grid must be positive".into()));
            }
            s.values.clone()
        }
        Some(s) => {
            return Err(CliError::Config(format!(
                "harvest-cdf sweeps theta only, not `{}`",
                s.field.column()
            )))
        }
        None => {
            let (lo, hi, n) = THETA_GRID;
            log_grid(lo, hi, n)?
        }
    };
    let p = params(&job.scenario)?;
    let mut log = Vec::new();
    let mut t = TableBuilder::new("theta_w", thetas.clone());
    let eval = |f: fn(f64, &HarvestParams) -> swipt_core::Result<f64>| -> Result<Vec<f64>, CliError> {
        Ok(thetas.iter().map(|&x| f(x, &p)).collect::<Result<Vec<_>, _>>()?)
    };
    t.cdf("cdf_bound", CurveKind::AnalyticalLowerBound, eval(harvested_power_cdf)?);
    t.cdf("cdf_full_load", CurveKind::AnalyticalLimit, eval(harvested_power_cdf_limit_fullload)?);
    t.cdf("cdf_lowest_limit", CurveKind::AnalyticalLimit, eval(harvested_power_cdf_lowest_limit)?);
    if job.trials > 0 {
        let set = simulate_point(&job.scenario, job, "config".into(), &mut log)?;
        t.empirical("cdf_mc", &set.harvested_power_cdf(&thetas), true);
    }
    Ok(RunReport::with_log(t.finish(), log))
}

/// Outage probabilities over a sweep (default: tier-1 load).
pub fn outage(job: &Job) -> Result<RunReport, CliError> {
    let (sweep, scenarios) = required_points(job, default_load_sweep())?;
    let mut log = Vec::new();
    let (mut eh, mut eh_full, mut ps, mut ps_full) = (vec![], vec![], vec![], vec![]);
    let (mut eh_mc, mut ps_mc) = (vec![], vec![]);
    for (&x, s) in sweep.values.iter().zip(&scenarios) {
        let p = params(s)?;
        let full = p.with_full_load();
        eh.push(outage_energy_harvesting(&p)?);
        eh_full.push(outage_energy_harvesting(&full)?);
        ps.push(outage_self_powered(&p)?);
        ps_full.push(outage_self_powered(&full)?);
        if job.trials > 0 {
            let set = simulate_point(s, job, format!("{}={x}", sweep.field.column()), &mut log)?;
            eh_mc.push(set.outage_energy_harvesting(s.swipt.min_harvest_power));
            ps_mc.push(set.outage_self_powered(uplink_energy(s)));
        }
    }
    let mut t = TableBuilder::new(sweep.field.column(), sweep.values.clone());
    t.curve("eps_eh", CurveKind::AnalyticalLowerBound, eh);
    t.curve("eps_eh_full_load", CurveKind::AnalyticalLimit, eh_full);
    t.curve("eps_ps", CurveKind::AnalyticalLowerBound, ps);
    t.curve("eps_ps_full_load", CurveKind::AnalyticalLimit, ps_full);
    if job.trials > 0 {
        t.empirical("eps_eh_mc", &eh_mc, false);
        t.empirical("eps_ps_mc", &ps_mc, false);
    }
    Ok(RunReport::with_log(t.finish(), log))
}

pub fn mean_energy(job: &Job) -> Result<RunReport, CliError> {
    let (sweep, scenarios) = required_points(job, default_load_sweep())?;
    let mut log = Vec::new();
    let (mut exact, mut full, mut sparse, mut dense, mut mc) = (vec![], vec![], vec![], vec![], vec![]);
    for (&x, s) in sweep.values.iter().zip(&scenarios) {
        let p = params(s)?;
        exact.push(mean_harvested_energy(&p)?);
        full.push(mean_harvested_energy(&p.with_full_load())?);
        sparse.push(mean_harvested_energy_sparse(&p));
        dense.push(mean_harvested_energy_dense(&p));
        if job.trials > 0 {
            let set = simulate_point(s, job, format!("{}={x}", sweep.field.column()), &mut log)?;
            mc.push(set.mean_harvested_energy());
        }
    }
    let mut t = TableBuilder::new(sweep.field.column(), sweep.values.clone());
    t.curve("mean_energy_j", CurveKind::Analytical, exact);
    t.curve("mean_energy_full_load_j", CurveKind::AnalyticalLimit, full);
    t.curve("mean_energy_sparse_j", CurveKind::Analytical, sparse);
    t.curve("mean_energy_dense_j", CurveKind::Analytical, dense);
    if job.trials > 0 {
        t.empirical("mean_energy_mc_j", &mc, false);
    }
    Ok(RunReport::with_log(t.finish(), log))
}

/// Which link a rate column describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Downlink,
    Uplink,
}

impl Link {
    fn name(self) -> &'static str {
        match self {
            Link::Downlink => "downlink",
            Link::Uplink => "uplink",
        }
    }
}

/// Ergodic rates over a sweep, in nats/Hz or bits/s/Hz.
pub fn rate_table(job: &Job, sweep: &SweepSpec, scenarios: &[Scenario], links: &[Link], bits: bool) -> Result<RunReport, CliError> {
    let unit = if bits { std::f64::consts::LN_2 } else { 1.0 };
    let suffix = if bits { "bits" } else { "nats" };
    let mut log = Vec::new();
    let mut bound = vec![vec![]; links.len()];
    let mut full = vec![vec![]; links.len()];
    let mut mc: Vec<Vec<Estimate>> = vec![vec![]; links.len()];
    let mut capped = vec![];
    for (&x, s) in sweep.values.iter().zip(scenarios) {
        let p = params(s)?;
        let (r, f) = (rates(&p)?, rates(&p.with_full_load())?);
        let set = if job.trials > 0 {
            Some(simulate_point(s, job, format!("{}={x}", sweep.field.column()), &mut log)?)
        } else {
            None
        };
        for (i, link) in links.iter().enumerate() {
            let (a, b) = match link {
                Link::Downlink => (r.c_dl, f.c_dl),
                Link::Uplink => (r.c_ul, f.c_ul),
            };
            bound[i].push(a / unit);
            full[i].push(b / unit);
            if let Some(set) = &set {
                let e = match link {
                    Link::Downlink => set.downlink_rate(),
                    Link::Uplink => set.uplink_rate(),
                };
                mc[i].push(Estimate {
                    mean: e.mean / unit,
                    std_err: e.std_err / unit,
                    n: e.n,
                });
            }
        }
        if let Some(set) = &set {
            capped.push(set.uplink_capped_fraction());
        }
    }
    let mut t = TableBuilder::new(sweep.field.column(), sweep.values.clone());
    for (i, link) in links.iter().enumerate() {
        t.curve(format!("{}_{suffix}", link.name()), CurveKind::AnalyticalLowerBound, bound[i].clone());
        t.curve(format!("{}_full_load_{suffix}", link.name()), CurveKind::AnalyticalLimit, full[i].clone());
        if job.trials > 0 {
            t.empirical(format!("{}_mc_{suffix}", link.name()), &mc[i], false);
        }
    }
    if job.trials > 0 && links.contains(&Link::Uplink) {
        t.curve("uplink_capped_fraction", CurveKind::Empirical, capped);
    }
    Ok(RunReport::with_log(t.finish(), log))
}

pub fn rates_command(job: &Job) -> Result<RunReport, CliError> {
    let (sweep, scenarios) = required_points(job, default_load_sweep())?;
    rate_table(job, &sweep, &scenarios, &[Link::Downlink, Link::Uplink], false)
}

const EE_COLUMNS: [&str; 12] = [
    "rho_star",
    "beta_star",
    "zeta_star_bits_per_j",
    "branch",
    "c_dl_nats",
    "c_ul_nats",
    "ratio_threshold",
    "grid_max_bits_per_j",
    "rho_lo",
    "rho_hi",
    "beta_lo",
    "beta_hi",
];

fn ee_row(r: &EEResult) -> Vec<Cell> {
    let branch = serde_json::to_value(r.branch)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let f = &r.feasible_sets;
    vec![
        r.rho_star.into(),
        r.beta_star.into(),
        r.zeta_star.into(),
        branch.into(),
        r.c_dl.into(),
        r.c_ul.into(),
        r.ratio_threshold.into(),
        r.grid_max.into(),
        f.rho.lo.into(),
        f.rho.hi.into(),
        f.beta.lo.into(),
        f.beta.hi.into(),
    ]
}

pub fn ee_optimize(job: &Job) -> Result<RunReport, CliError> {
    let to_value = |v: &EEResult| serde_json::to_value(v).map_err(|e| CliError::Numerics(e.to_string()));
    match sweep_points(job, None)? {
        None => {
            let r = optimize(&params(&job.scenario)?)?;
            let mut records = Records::new(EE_COLUMNS);
            records.push(ee_row(&r));
            Ok(RunReport::new(Output::Document {
                value: to_value(&r)?,
                records,
            }))
        }
        Some((sweep, scenarios)) => {
            let column = sweep.field.column();
            let mut records = Records::new(std::iter::once(column.as_str()).chain(EE_COLUMNS));
            let mut values = Vec::new();
            for (&x, s) in sweep.values.iter().zip(&scenarios) {
                let r = optimize(&params(s)?)?;
                let mut row = vec![Cell::from(x)];
                row.extend(ee_row(&r));
                records.push(row);
                values.push(json!({ column.as_str(): x, "result": to_value(&r)? }));
            }
            Ok(RunReport::new(Output::Document {
                value: Value::Array(values),
                records,
            }))
        }
    }
}

/// Raw per-trial outcomes of the configured scenario.
pub fn simulate(job: &Job) -> Result<RunReport, CliError> {
    if job.sweep.is_some() {
        return Err(CliError::Config("simulate does not take --sweep".into()));
    }
    if job.trials == 0 {
        return Err(CliError::Config("simulate needs --trials > 0".into()));
    }
    let mut log = Vec::new();
    let set = simulate_point(&job.scenario, job, "config".into(), &mut log)?;
    let mut records = Records::new([
        "trial",
        "serving_tier",
        "p_dl_w",
        "p_eh_w",
        "e_eh_j",
        "gamma_dl",
        "gamma_ul",
    ]);
    for o in &set.outcomes {
        records.push(vec![
            o.trial.into(),
            (o.serving_tier + 1).into(),
            o.p_dl.into(),
            o.p_eh.into(),
            o.e_eh.into(),
            o.gamma_dl.into(),
            o.gamma_ul.into(),
        ]);
    }
    Ok(RunReport::with_log(Output::Records(records), log))
}
