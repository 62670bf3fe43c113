//! Command-line driver for two-stage ordinal group-sequential designs.
//!
//! Subcommands mirror the workflow: `ss-po`, `ss-npo`, and `ss-switch`
//! estimate sample sizes; `oc-po`, `oc-npo`, and `oc-switch` simulate
//! operating characteristics; `power-curve` sweeps power against the effect
//! size or the stage size. Each run reads a TOML configuration (plus flag
//! overrides) and writes a CSV table, a JSON result document, and a config
//! echo into the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible target
//! (no cutoff pair meets alpha, or no grid size reaches the power target),
//! 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ordinal_gsd::trial::Design;
use ordinal_gsd_cli::{config, run, CliError};

#[derive(Parser)]
#[command(
    name = "ordinal-gsd",
    version,
    about = "Two-arm two-stage Bayesian group sequential designs for ordinal endpoints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated trials override.
    #[arg(long)]
    ntrial: Option<usize>,
    /// Type I error target override.
    #[arg(long)]
    alpha: Option<f64>,
    /// Power target override (ss-* commands).
    #[arg(long)]
    power: Option<f64>,
    /// Inference method override: Bayesian or Frequentist.
    #[arg(long)]
    method: Option<String>,
    /// Output directory (default `out`).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Allow writing into a non-empty output directory.
    #[arg(long)]
    overwrite: bool,
    /// Cap the worker thread count.
    #[arg(long)]
    threads: Option<usize>,
    /// Include the full per-trial outcome log in result.json.
    #[arg(long)]
    full_log: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample size for the proportional-odds design.
    SsPo(RunArgs),
    /// Sample size for the non-proportional-odds design.
    SsNpo(RunArgs),
    /// Sample size for the PO/NPO switch design.
    SsSwitch(RunArgs),
    /// Operating characteristics of the PO design.
    OcPo(RunArgs),
    /// Operating characteristics of the NPO design.
    OcNpo(RunArgs),
    /// Operating characteristics of the switch design.
    OcSwitch(RunArgs),
    /// Power against effect size or stage size.
    PowerCurve(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::SsPo(a)
            | Command::SsNpo(a)
            | Command::SsSwitch(a)
            | Command::OcPo(a)
            | Command::OcNpo(a)
            | Command::OcSwitch(a)
            | Command::PowerCurve(a) => a,
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let args = cli.command.args();
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Run(format!("thread pool setup failed: {e}")))?;
    }
    let over = config::Overrides {
        seed: args.seed,
        ntrial: args.ntrial,
        alpha: args.alpha,
        power: args.power,
        method: args.method.clone(),
    };
    let raw = config::load(&args.config, &over)?;
    let resolved = raw.resolve()?;
    let sink = run::sink_for(&args.out, args.overwrite);

    match &cli.command {
        Command::OcPo(_) => run::run_oc("oc-po", Design::Po, &resolved, &sink, args.full_log),
        Command::OcNpo(_) => run::run_oc("oc-npo", Design::Npo, &resolved, &sink, args.full_log),
        Command::OcSwitch(_) => {
            run::run_oc("oc-switch", Design::Switch, &resolved, &sink, args.full_log)
        }
        Command::SsPo(_) => run::run_ss("ss-po", Design::Po, &resolved, &sink),
        Command::SsNpo(_) => run::run_ss("ss-npo", Design::Npo, &resolved, &sink),
        Command::SsSwitch(_) => run::run_ss("ss-switch", Design::Switch, &resolved, &sink),
        Command::PowerCurve(_) => run::run_power_curve(&resolved, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Unreachable(_) => ExitCode::from(3),
                CliError::Run(_) => ExitCode::FAILURE,
            }
        }
    }
}
