//! `hodoiod`: heading-only initial orbit determination from the command line.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hodoiod::solver::DEFAULT_E_MIN;
use hodoiod::CentralBody;

use commands::{Failure, SolveArgs};

#[derive(Debug, Parser)]
#[command(name = "hodoiod", version, about = "Initial orbit determination from timed velocity headings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate heading observations from a scenario config.
    Simulate {
        /// Scenario JSON.
        #[arg(long, short)]
        config: PathBuf,
        /// Observation CSV to write.
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Determine the orbit from an observation CSV.
    Solve {
        /// Observation CSV (`t_sec,sx,sy,sz`).
        #[arg(long)]
        observations: PathBuf,
        /// Solution JSON to write.
        #[arg(long, short)]
        output: PathBuf,
        /// Gravitational parameter, km^3/s^2.
        #[arg(long, default_value_t = CentralBody::MOON_MU)]
        mu: f64,
        /// Print the iteration history.
        #[arg(long)]
        echo_iterations: bool,
        /// Eccentricity below which the centre direction is regularized.
        #[arg(long, default_value_t = DEFAULT_E_MIN)]
        e_min: f64,
        /// Iteration limit per Levenberg-Marquardt run.
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Run a Monte Carlo noise study.
    Montecarlo {
        /// Monte Carlo JSON.
        #[arg(long, short)]
        config: PathBuf,
        /// Summary CSV to write.
        #[arg(long, short)]
        output: PathBuf,
        /// Per-trial CSV; defaults to `<output stem>.trials.csv`.
        #[arg(long)]
        trials_output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };

    let outcome = match &cli.command {
        Command::Simulate { config, output } => commands::simulate(config, output),
        Command::Solve {
            observations,
            output,
            mu,
            echo_iterations,
            e_min,
            max_iter,
        } => commands::solve_command(&SolveArgs {
            observations,
            output,
            mu: *mu,
            e_min: *e_min,
            max_iterations: *max_iter,
            echo_iterations: *echo_iterations,
        }),
        Command::Montecarlo {
            config,
            output,
            trials_output,
        } => commands::montecarlo(config, output, trials_output.as_deref()),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let kind = match failure {
                Failure::Config(_) => "error",
                Failure::Numerical(_) => "numerical failure",
            };
            eprintln!("hodoiod: {kind}: {:#}", failure.error());
            ExitCode::from(failure.exit_code())
        }
    }
}
