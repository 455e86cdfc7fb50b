//! `swipt`: command-line runner for the swipt-core engine.

mod commands;
mod figures;
mod output;
mod sweep;
mod validate;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use swipt_core::Scenario;

use crate::commands::{Job, RunReport, SIMULATE_TRIALS};
use crate::figures::Figure;
use crate::output::{emit, Format, Manifest};
use crate::sweep::SweepSpec;
use crate::validate::VALIDATE_TRIALS;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("SWIPT_GIT_DESCRIBE"));

/// Bundled profiles, selectable by name with `--config`.
const PROFILES: [(&str, &str); 2] = [
    ("table1", include_str!("../../../configs/table1.toml")),
    ("table1-alpha2.5", include_str!("../../../configs/table1-alpha2.5.toml")),
];

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numerics(String),
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerics(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerics(m) => write!(f, "numerical failure: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl From<swipt_core::Error> for CliError {
    fn from(e: swipt_core::Error) -> CliError {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerics(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "swipt", version = VERSION, about = "Cell-load-aware SWIPT analysis and simulation for multi-tier networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Clone, Args)]
struct Options {
    /// Scenario file (.toml or .json) or a bundled profile name
    /// (table1, table1-alpha2.5). Defaults to the command's bundled profile.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
    /// Base seed; trial i of every simulated point draws from stream i.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo trials per point; 0 disables simulation.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Output file; stdout when absent. The run manifest goes to PATH.manifest.json.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Sweep a config field over a grid, e.g. cell_load=0.5:32:7:log.
    #[arg(long, global = true, value_name = "FIELD=start:stop:points[:log]")]
    sweep: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Per-tier cell loads, non-void and association probabilities.
    Stats,
    /// Harvested-power CDF: load-aware bound, limits, and optional simulation.
    HarvestCdf,
    /// Energy-harvesting and self-powering outage probabilities.
    Outage,
    /// Mean harvested energy per slot.
    MeanEnergy,
    /// Downlink and uplink ergodic rates.
    Rates,
    /// Energy-efficiency optimal power split and downlink fraction.
    EeOptimize,
    /// Raw per-trial Monte Carlo outcomes.
    Simulate,
    /// Run the invariant suite; exits 4 if any check fails.
    Validate,
    /// Emit the data behind a published figure.
    ReproduceFigure {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Re-execute the run recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

impl Command {
    fn words(&self) -> Vec<String> {
        let name = match self {
            Command::Stats => "stats",
            Command::HarvestCdf => "harvest-cdf",
            Command::Outage => "outage",
            Command::MeanEnergy => "mean-energy",
            Command::Rates => "rates",
            Command::EeOptimize => "ee-optimize",
            Command::Simulate => "simulate",
            Command::Validate => "validate",
            Command::ReproduceFigure { figure } => return vec!["reproduce-figure".into(), figure.name().into()],
            Command::Replay { .. } => "replay",
        };
        vec![name.into()]
    }

    fn default_profile(&self) -> &'static str {
        match self {
            Command::ReproduceFigure { figure } => figure.default_profile(),
            _ => "table1",
        }
    }

    fn default_trials(&self) -> usize {
        match self {
            Command::Simulate => SIMULATE_TRIALS,
            Command::Validate => VALIDATE_TRIALS,
            Command::ReproduceFigure { figure } => figure.default_trials(),
            _ => 0,
        }
    }

    fn run(&self, job: &Job) -> Result<RunReport, CliError> {
        match self {
            Command::Stats => commands::stats(job),
            Command::HarvestCdf => commands::harvest_cdf(job),
            Command::Outage => commands::outage(job),
            Command::MeanEnergy => commands::mean_energy(job),
            Command::Rates => commands::rates_command(job),
            Command::EeOptimize => commands::ee_optimize(job),
            Command::Simulate => commands::simulate(job),
            Command::Validate => validate::validate(job),
            Command::ReproduceFigure { figure } => figures::reproduce(*figure, job),
            Command::Replay { .. } => unreachable!("replay is resolved before dispatch"),
        }
    }
}

fn profile(name: &str) -> Option<&'static str> {
    PROFILES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// The scenario and a description of where it came from.
fn load_config(arg: Option<&str>, command: &Command) -> Result<(Scenario, String), CliError> {
    let name = arg.unwrap_or(command.default_profile());
    if let (Some(text), false) = (profile(name), Path::new(name).exists()) {
        return Ok((Scenario::from_toml_str(text)?, format!("bundled:{name}")));
    }
    let path = Path::new(name);
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "{name}: no such file or bundled profile (bundled: {})",
            PROFILES.map(|(n, _)| n).join(", ")
        )));
    }
    Ok((Scenario::from_path(path)?, path.display().to_string()))
}

struct Resolved {
    command: Command,
    job: Job,
    format: Format,
    config_source: String,
}

fn resolve(cli: &Cli) -> Result<Resolved, CliError> {
    if let Command::Replay { manifest } = &cli.command {
        let m = Manifest::load(manifest)?;
        let mut words = vec!["swipt".to_string()];
        words.extend(m.command.iter().cloned());
        let inner = Cli::try_parse_from(&words).map_err(|e| CliError::Config(format!("manifest command: {e}")))?;
        if matches!(inner.command, Command::Replay { .. }) {
            return Err(CliError::Config("a manifest cannot replay another manifest".into()));
        }
        let sweep = m.sweep.as_deref().map(str::parse::<SweepSpec>).transpose()?;
        return Ok(Resolved {
            command: inner.command,
            job: Job {
                scenario: m.config.into_scenario()?,
                seed: m.seed,
                trials: m.trials,
                sweep,
            },
            format: m.format,
            config_source: format!("replay:{}", manifest.display()),
        });
    }
    let o = &cli.opts;
    let (scenario, config_source) = load_config(o.config.as_deref(), &cli.command)?;
    let sweep = o.sweep.as_deref().map(str::parse::<SweepSpec>).transpose()?;
    Ok(Resolved {
        job: Job {
            scenario,
            seed: o.seed,
            trials: o.trials.unwrap_or(cli.command.default_trials()),
            sweep,
        },
        command: cli.command.clone(),
        format: o.format,
        config_source,
    })
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    let start = Instant::now();
    if let Some(n) = cli.opts.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let r = resolve(&cli)?;
    let report = r.command.run(&r.job)?;
    let out = cli.opts.out.as_deref();
    emit(&report.output.render(r.format)?, out)?;

    let manifest = Manifest {
        tool: "swipt".into(),
        version: VERSION.into(),
        command: r.command.words(),
        seed: r.job.seed,
        trials: if report.simulation.is_empty() { 0 } else { r.job.trials },
        sweep: r.job.sweep.as_ref().map(|s| s.to_string()),
        format: r.format,
        threads: rayon::current_num_threads(),
        config_source: r.config_source,
        config: r.job.scenario.to_file(),
        argv,
        output: out.map(Path::to_path_buf),
        wall_time_s: start.elapsed().as_secs_f64(),
        simulation: report.simulation,
    };
    let text = manifest.to_json()?;
    match out {
        Some(path) => emit(format!("{text}\n").as_bytes(), Some(&Manifest::path_for(path)))?,
        None => eprintln!("{text}"),
    }
    match report.failure {
        Some(why) => Err(CliError::Validation(why)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swipt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
