//! `eqtax` command-line front end.
//!
//! [`run`] parses an argument list, executes one subcommand and returns a
//! [`CommandOutcome`]; the binary only prints it and exits.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use output::ParamTable;

/// Exit code for domain, validation and I/O failures.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for usage errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "eqtax",
    version,
    about = "Equilibrium-conserving taxation of capital income",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory receiving the CSV outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Write the main table to stdout as CSV and the summary to stderr.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the exponential and Pareto regimes to a binned income table.
    Fit(FitArgs),
    /// Tail exponent implied by a scenario's capital income.
    Gamma(ScenarioArg),
    /// Post-tax exponent, τ and the tax schedule for a levy.
    Schedule(ScheduleArgs),
    /// Poverty gap, levy feasibility and revenue checks.
    Revenue(PolicyArgs),
    /// Monte-Carlo check of the tax map on a Pareto sample.
    SimulateTax(SimulateTaxArgs),
    /// Agent-based additive or multiplicative exchange model.
    SimulateExchange(ExchangeArgs),
    /// Full worked example for a scenario.
    Report(ScheduleArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    /// Scenario file (`key = value` lines).
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArg,

    /// Revenue to raise from the capital class, in G€.
    #[arg(long, conflicts_with = "tau")]
    pub delta_m_geur: Option<f64>,

    /// Post-tax income exponent τ in (0, 1]; the levy follows from it.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub policy: PolicyArgs,

    /// Geometric income grid `lo:hi:n` in k€ (default: x_c to 10 x_c, 200 points).
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Bins CSV with header `income_keur_lo,income_keur_hi,count`.
    pub bins: PathBuf,

    /// Lower edge of the exponential fit window, in k€.
    #[arg(long, default_value_t = 13.25)]
    pub x_pov_keur: f64,

    /// Crossover income, in k€.
    #[arg(long, default_value_t = 100.0)]
    pub x_c_keur: f64,

    /// Seed for bootstrap p-values; without it only KS distances are reported.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateTaxArgs {
    #[command(flatten)]
    pub policy: PolicyArgs,

    #[arg(long)]
    pub seed: u64,

    /// Number of Pareto draws.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Additive,
    Multiplicative,
}

#[derive(Debug, Args)]
pub struct ExchangeArgs {
    #[arg(long, value_enum)]
    pub model: Model,

    #[arg(long)]
    pub seed: u64,

    #[arg(long, default_value_t = 100_000)]
    pub agents: usize,

    /// Interaction events (default: 1000 per agent additive, 2000 per agent multiplicative).
    #[arg(long)]
    pub steps: Option<u64>,

    /// Additive transfer scale as a fraction of the mean.
    #[arg(long, default_value_t = 1.0)]
    pub fraction: f64,

    /// Additive mean wealth, in k€.
    #[arg(long, default_value_t = 28.013)]
    pub mean_keur: f64,

    /// Multiplicative target tail exponent; sets the drift.
    #[arg(long, default_value_t = 2.4)]
    pub gamma_target: f64,

    /// Multiplicative per-step log volatility.
    #[arg(long, default_value_t = 0.1)]
    pub volatility: f64,

    /// Multiplicative reflecting barrier, in k€.
    #[arg(long, default_value_t = 100.0)]
    pub barrier_keur: f64,
}

/// Geometric grid specification in k€.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo_keur: f64,
    pub hi_keur: f64,
    pub n: usize,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected lo:hi:n, got '{s}'"));
    };
    let lo_keur: f64 = lo.parse().map_err(|_| format!("bad grid start '{lo}'"))?;
    let hi_keur: f64 = hi.parse().map_err(|_| format!("bad grid end '{hi}'"))?;
    let n: usize = n.parse().map_err(|_| format!("bad grid size '{n}'"))?;
    if !(lo_keur > 0.0 && hi_keur >= lo_keur && n >= 1) {
        return Err(format!("grid needs 0 < lo <= hi and n >= 1, got '{s}'"));
    }
    Ok(Grid {
        lo_keur,
        hi_keur,
        n,
    })
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] eqtax_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub emitted_files: Vec<PathBuf>,
    /// Human-readable text; an error message when `exit_code != 0`.
    pub summary: String,
    /// Main table for `--csv` mode.
    pub csv: Option<String>,
}

impl CommandOutcome {
    fn failure(code: i32, message: String) -> Self {
        Self {
            exit_code: code,
            emitted_files: Vec::new(),
            summary: message,
            csv: None,
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return CommandOutcome::failure(code, e.render().to_string());
        }
    };
    match commands::execute(&cli) {
        Ok(outcome) => outcome,
        Err(e) => CommandOutcome::failure(EXIT_FAILURE, format!("error: {}", describe(&e))),
    }
}

fn describe(e: &CliError) -> String {
    match e {
        CliError::Core(eqtax_core::Error::InfeasibleLevy {
            delta_m,
            max_delta_m,
        }) => format!(
            "infeasible levy: {} G€ requested, the maximum feasible ΔM is {} G€ (exclusive)",
            output::sig(delta_m / 1e9, 4),
            output::sig(max_delta_m / 1e9, 4)
        ),
        other => other.to_string(),
    }
}
