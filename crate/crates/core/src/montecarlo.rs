//! Monte Carlo noise studies.
//!
//! Each trial regenerates the scenario's headings with its own seed, solves,
//! and records the signed semi-major axis and eccentricity errors. Trials run
//! on the rayon pool; per-trial seeds depend only on the master seed, the
//! noise level index and the trial index, and statistics are accumulated in
//! trial order, so results do not depend on the number of worker threads.
//!
//! The reported `a_sigma` / `e_sigma` are the RMS of the signed errors of
//! converged trials. Mean and sample standard deviation are exported too.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IodError, Result};
use crate::simulate::{generate_observations, Scenario};
use crate::solver::{solve, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// Truth orbit and sampling; its noise and seed are overridden per trial.
    pub scenario: Scenario,
    pub trials: usize,
    pub noise_levels_deg: Vec<f64>,
    pub master_seed: u64,
    pub solve_options: SolveOptions,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(IodError::InvalidInput("trials must be at least 1".into()));
        }
        if self.noise_levels_deg.is_empty() {
            return Err(IodError::InvalidInput("no noise levels given".into()));
        }
        for &sigma in &self.noise_levels_deg {
            Scenario {
                noise_sigma_deg: sigma,
                ..self.scenario.clone()
            }
            .validate()?;
        }
        Ok(())
    }
}

/// Outcome of one trial. Errors are estimate minus truth; NaN when the solver
/// returned an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub noise_deg: f64,
    pub a_err_km: f64,
    pub e_err: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStats {
    pub noise_deg: f64,
    pub trials: usize,
    pub failures: usize,
    pub a_sigma_km: f64,
    pub e_sigma: f64,
    pub a_mean_km: f64,
    pub a_std_km: f64,
    pub e_mean: f64,
    pub e_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub stats: LevelStats,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub observations: usize,
    pub levels: Vec<LevelResult>,
}

/// One summary line: observation count, noise, trial count, 1-sigma errors
/// and failures, followed by the mean/std reading of the same errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub observations: usize,
    pub noise_deg: f64,
    pub trials: usize,
    pub a_sigma_km: f64,
    pub e_sigma: f64,
    pub failures: usize,
    pub a_mean_km: f64,
    pub a_std_km: f64,
    pub e_mean: f64,
    pub e_std: f64,
}

/// SplitMix64 finalizer, used to derive independent trial seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at noise level `level`.
pub fn trial_seed(master_seed: u64, level: usize, trial: usize) -> u64 {
    mix(mix(mix(master_seed) ^ level as u64) ^ trial as u64)
}

fn run_trial(cfg: &McConfig, level: usize, noise_deg: f64, trial: usize) -> TrialRecord {
    let scenario = Scenario {
        noise_sigma_deg: noise_deg,
        seed: trial_seed(cfg.master_seed, level, trial),
        ..cfg.scenario.clone()
    };
    let truth = &cfg.scenario.elements;
    let outcome = generate_observations(&scenario)
        .and_then(|obs| solve(&obs, &scenario.body, &cfg.solve_options));
    match outcome {
        Ok(report) => TrialRecord {
            trial,
            noise_deg,
            a_err_km: report.elements.elements.a - truth.a,
            e_err: report.elements.elements.e - truth.e,
            converged: report.converged,
        },
        Err(_) => TrialRecord {
            trial,
            noise_deg,
            a_err_km: f64::NAN,
            e_err: f64::NAN,
            converged: false,
        },
    }
}

/// `(rms, mean, sample std)`; NaN where undefined.
fn moments(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        f64::NAN
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (rms, mean, std)
}

pub fn level_stats(noise_deg: f64, records: &[TrialRecord]) -> LevelStats {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.converged).collect();
    let a: Vec<f64> = ok.iter().map(|r| r.a_err_km).collect();
    let e: Vec<f64> = ok.iter().map(|r| r.e_err).collect();
    let (a_sigma_km, a_mean_km, a_std_km) = moments(&a);
    let (e_sigma, e_mean, e_std) = moments(&e);
    LevelStats {
        noise_deg,
        trials: records.len(),
        failures: records.len() - ok.len(),
        a_sigma_km,
        e_sigma,
        a_mean_km,
        a_std_km,
        e_mean,
        e_std,
    }
}

/// Runs `trials` noisy solves at every noise level.
pub fn run_monte_carlo(cfg: &McConfig) -> Result<McResult> {
    cfg.validate()?;
    let levels = cfg
        .noise_levels_deg
        .iter()
        .enumerate()
        .map(|(level, &noise_deg)| {
            let records: Vec<TrialRecord> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| run_trial(cfg, level, noise_deg, trial))
                .collect();
            LevelResult {
                stats: level_stats(noise_deg, &records),
                records,
            }
        })
        .collect();
    Ok(McResult {
        observations: cfg.scenario.sampling.len(),
        levels,
    })
}

pub fn summarize(result: &McResult) -> Vec<SummaryRow> {
    result
        .levels
        .iter()
        .map(|level| {
            let s = &level.stats;
            SummaryRow {
                observations: result.observations,
                noise_deg: s.noise_deg,
                trials: s.trials,
                a_sigma_km: s.a_sigma_km,
                e_sigma: s.e_sigma,
                failures: s.failures,
                a_mean_km: s.a_mean_km,
                a_std_km: s.a_std_km,
                e_mean: s.e_mean,
                e_std: s.e_std,
            }
        })
        .collect()
}
