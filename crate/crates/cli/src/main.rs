//! `mcc-eiv`: generate errors-in-variables datasets, fit them, evaluate the
//! MCC error bound, and run the Monte Carlo sweeps.
//!
//! Exit codes: 0 success, 1 bound verification found violations, 2 usage or
//! configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Format;

#[derive(Parser, Debug)]
#[command(name = "mcc-eiv", version, about = "Maximum correntropy estimation for errors-in-variables models")]
struct Cli {
    /// JSON object of flag values (keys are long flag names); command-line
    /// flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; every random stream is derived from it [default: 0].
    #[arg(long, global = true, env = "MCC_EIV_SEED")]
    seed: Option<u64>,

    /// Output file; `-` or absent writes to stdout where that makes sense.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for sweeps and verification.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a synthetic dataset and write it with a metadata sidecar.
    Generate(commands::generate::GenerateArgs),
    /// Fit the selected estimators to a dataset file.
    Estimate(commands::estimate::EstimateArgs),
    /// Evaluate the error bound of the MCC solution.
    Bound(commands::bound::BoundArgs),
    /// Run a Monte Carlo sweep and write its summary and manifest.
    Sweep(commands::sweep::SweepArgs),
    /// Check the bound against grid maximizers on random configurations.
    Verify(commands::verify::VerifyArgs),
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut file = match &cli.config {
        Some(p) => config::load(p)?,
        None => Default::default(),
    };
    let common = config::common(&mut file, cli.seed, cli.output, cli.format, cli.threads)?;
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match &cli.command {
        Command::Generate(a) => commands::generate::run(&config::merge(a, file)?, &common),
        Command::Estimate(a) => commands::estimate::run(&config::merge(a, file)?, &common),
        Command::Bound(a) => commands::bound::run(&config::merge(a, file)?, &common),
        Command::Sweep(a) => commands::sweep::run(&config::merge(a, file)?, &common),
        Command::Verify(a) => commands::verify::run(&config::merge(a, file)?, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
