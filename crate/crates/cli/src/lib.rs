//! `sdrd`: scenario runner, checker and attractor analyser built on `sdrd-core`.

pub mod artifacts;
pub mod checks;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{render, Outcome, Synthetic};
use crate::config::load_scenario;
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "sdrd", version, about = "Singular-degenerate reaction-diffusion runs, checks and attractor analyses")]
pub struct Cli {
    /// Worker threads for batch work (sweeps, paired runs, attractor members).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario (an R sweep if the schedule has several entries).
    Run(RunArgs),
    /// Solve a scenario for every entry of its R schedule.
    Sweep(RunArgs),
    /// Re-evaluate checks on a finished run directory.
    Check(CheckArgs),
    /// Sample omega-limit sets and estimate dimension and attraction rate.
    Attractor(AttractorArgs),
    /// Run every shipped scenario and synthetic set.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed_override: Option<u64>,
    /// Comma-separated check names; defaults to `diagnostics.checks`.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub run_dir: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Where to write the reports as JSON (outside the run directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttractorArgs {
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed_override: Option<u64>,
}

fn finish(outcome: &Outcome) -> i32 {
    print!("{}", render(outcome));
    if outcome.passed() {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    }
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Run(a) => {
            let loaded = load_scenario(&a.config, a.seed_override)?;
            Ok(finish(&commands::run(&loaded, &a.out, a.checks.as_deref(), false)?))
        }
        Command::Sweep(a) => {
            let loaded = load_scenario(&a.config, a.seed_override)?;
            Ok(finish(&commands::run(&loaded, &a.out, a.checks.as_deref(), true)?))
        }
        Command::Check(a) => {
            let outcome = commands::check(&a.run_dir, a.checks.as_deref())?;
            if let Some(path) = &a.out {
                if path.starts_with(&a.run_dir) {
                    return Err(CliError::Usage("reports must be written outside the run directory".into()));
                }
                artifacts::write_json(path, &outcome.reports)?;
            }
            Ok(finish(&outcome))
        }
        Command::Attractor(a) => {
            let outcome = match (a.synthetic, &a.config) {
                (Some(kind), _) => commands::attractor_synthetic(kind, &a.out)?,
                (None, Some(path)) => {
                    let loaded = load_scenario(path, None)?;
                    commands::attractor(&loaded, &a.out, a.seed_override)?
                }
                (None, None) => return Err(CliError::Usage("attractor needs --config or --synthetic".into())),
            };
            Ok(finish(&outcome))
        }
        Command::Selftest(a) => {
            let (outcomes, hash) = commands::selftest(&a.out, a.seed_override)?;
            for o in &outcomes {
                print!("{}", render(o));
            }
            let passed = outcomes.iter().filter(|o| o.passed()).count();
            println!("selftest: {passed}/{} passed", outcomes.len());
            println!("selftest manifest {hash}");
            Ok(if passed == outcomes.len() { EXIT_OK } else { EXIT_RUNTIME })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let workers = cli.workers;
    let work = move || match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    match workers {
        Some(0) => {
            eprintln!("error: usage: --workers must be at least 1");
            EXIT_USAGE
        }
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(e) => {
                eprintln!("error: cannot start worker pool: {e}");
                EXIT_RUNTIME
            }
        },
        None => work(),
    }
}
