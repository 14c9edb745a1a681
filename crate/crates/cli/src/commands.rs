use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use hodoiod::montecarlo::summarize;
use hodoiod::{generate_observations, run_monte_carlo, solve, CentralBody, IodError, SolveOptions};

use crate::config::{parse_monte_carlo, parse_scenario};
use crate::io::{
    read_observations, write_csv, write_observations, SolutionJson, SummaryCsvRow, TrialCsvRow,
    SUMMARY_HEADER, TRIAL_HEADER,
};

/// Command failure, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed configuration or input data (exit 2).
    Config(anyhow::Error),
    /// The numerics failed on valid input (exit 3).
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Numerical(e) => e,
        }
    }
}

pub type Outcome = Result<(), Failure>;

trait ConfigContext<T> {
    fn config(self) -> Result<T, Failure>;
}

impl<T> ConfigContext<T> for anyhow::Result<T> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(Failure::Config)
    }
}

/// Input-validation errors from the library are configuration errors;
/// anything else is numerical.
fn classify(err: IodError) -> Failure {
    match err {
        IodError::InvalidInput(_) => Failure::Config(err.into()),
        _ => Failure::Numerical(err.into()),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .config()
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Config)
}

pub fn simulate(config: &Path, output: &Path) -> Outcome {
    let cfg = parse_scenario(&read_text(config)?)
        .with_context(|| config.display().to_string())
        .config()?;
    let scenario = cfg.scenario().config()?;
    let observations = generate_observations(&scenario).map_err(classify)?;
    let mut out = create(output)?;
    write_observations(&mut out, &observations).config()?;
    out.flush().context("flush").config()
}

pub struct SolveArgs<'a> {
    pub observations: &'a Path,
    pub output: &'a Path,
    pub mu: f64,
    pub e_min: f64,
    pub max_iterations: usize,
    pub echo_iterations: bool,
}

pub fn solve_command(args: &SolveArgs) -> Outcome {
    let body = CentralBody::new(args.mu).context("--mu").config()?;
    let file = File::open(args.observations)
        .with_context(|| format!("cannot read {}", args.observations.display()))
        .config()?;
    let observations = read_observations(file)
        .with_context(|| args.observations.display().to_string())
        .config()?;
    let options = SolveOptions {
        e_min: args.e_min,
        max_iterations: args.max_iterations,
        ..SolveOptions::default()
    };
    let report = solve(&observations, &body, &options).map_err(classify)?;

    if args.echo_iterations {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        let _ = writeln!(out, "{:>3} {:>14} {:>10} {:>10} {:>10}", "m", "residual_s2", "R", "c1", "c2");
        for h in &report.history {
            let _ = writeln!(
                out,
                "{:>3} {:>14.6e} {:>10.6} {:>10.6} {:>10.6}",
                h.iteration, h.objective, h.x.r, h.x.c1, h.x.c2
            );
        }
    }

    let solution = SolutionJson::from_report(&report, body.mu);
    let mut out = create(args.output)?;
    serde_json::to_writer_pretty(&mut out, &solution).context("write solution").config()?;
    writeln!(out).and_then(|_| out.flush()).context("write solution").config()?;

    if report.converged {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!(
            "solver did not converge (objective {:e} s^2 after {} iterations); best estimate written to {}",
            report.objective,
            report.iterations,
            args.output.display()
        )))
    }
}

/// Default per-trial output next to the summary: `summary.csv` becomes
/// `summary.trials.csv`.
pub fn default_trials_path(summary: &Path) -> PathBuf {
    let stem = summary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    summary.with_file_name(format!("{stem}.trials.csv"))
}

pub fn montecarlo(config: &Path, output: &Path, trials_output: Option<&Path>) -> Outcome {
    let cfg = parse_monte_carlo(&read_text(config)?)
        .with_context(|| config.display().to_string())
        .config()?;
    let cases = cfg.cases().config()?;

    let mut summary = Vec::new();
    let mut trials = Vec::new();
    for (name, case) in &cases {
        let result = run_monte_carlo(case).map_err(classify)?;
        summary.extend(summarize(&result).iter().map(|row| SummaryCsvRow::new(name, row)));
        for level in &result.levels {
            trials.extend(level.records.iter().map(|r| TrialCsvRow::new(name, result.observations, r)));
        }
    }

    let mut out = create(output)?;
    write_csv(&mut out, &SUMMARY_HEADER, &summary).config()?;
    out.flush().context("flush").config()?;

    let trials_path = trials_output.map(Path::to_path_buf).unwrap_or_else(|| default_trials_path(output));
    let mut out = create(&trials_path)?;
    write_csv(&mut out, &TRIAL_HEADER, &trials).config()?;
    out.flush().context("flush").config()
}
