//! JSON configuration documents. Angles are in degrees; every document carries
//! `schema_version` and rejects unknown fields.

use anyhow::{bail, Context};
use hodoiod::simulate::{NoiseModel, Sampling, Scenario};
use hodoiod::solver::SolveOptions;
use hodoiod::{CentralBody, McConfig, OrbitalElements};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementsConfig {
    pub a_km: f64,
    pub e: f64,
    pub inc_deg: f64,
    pub raan_deg: f64,
    pub argp_deg: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModelConfig {
    #[default]
    AxisTilt,
    TangentGaussian,
}

impl From<NoiseModelConfig> for NoiseModel {
    fn from(value: NoiseModelConfig) -> Self {
        match value {
            NoiseModelConfig::AxisTilt => NoiseModel::AxisTilt,
            NoiseModelConfig::TangentGaussian => NoiseModel::TangentGaussian,
        }
    }
}

/// Truth orbit and where to sample it. Exactly one of `true_anomalies_deg`
/// and `times_sec` must be given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_mu")]
    pub mu_km3_s2: f64,
    pub elements: ElementsConfig,
    #[serde(default)]
    pub true_anomalies_deg: Option<Vec<f64>>,
    #[serde(default)]
    pub times_sec: Option<Vec<f64>>,
}

fn default_mu() -> f64 {
    CentralBody::MOON_MU
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub orbit: OrbitConfig,
    #[serde(default)]
    pub noise_sigma_deg: f64,
    #[serde(default)]
    pub noise_model: NoiseModelConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_e_min")]
    pub e_min: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            e_min: default_e_min(),
            max_iterations: default_max_iterations(),
            restarts: default_restarts(),
        }
    }
}

fn default_e_min() -> f64 {
    SolveOptions::default().e_min
}

fn default_max_iterations() -> usize {
    SolveOptions::default().max_iterations
}

fn default_restarts() -> bool {
    true
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            e_min: self.e_min,
            max_iterations: self.max_iterations,
            restarts: self.restarts,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub schema_version: u32,
    pub trials: usize,
    pub noise_levels_deg: Vec<f64>,
    pub master_seed: u64,
    #[serde(default)]
    pub noise_model: NoiseModelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub cases: Vec<OrbitConfig>,
}

fn check_version(found: u32) -> anyhow::Result<()> {
    if found != SCHEMA_VERSION {
        bail!("unsupported schema_version {found} (expected {SCHEMA_VERSION})");
    }
    Ok(())
}

pub fn parse_scenario(text: &str) -> anyhow::Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).context("invalid scenario config")?;
    check_version(cfg.schema_version)?;
    Ok(cfg)
}

pub fn parse_monte_carlo(text: &str) -> anyhow::Result<MonteCarloConfig> {
    let cfg: MonteCarloConfig = serde_json::from_str(text).context("invalid Monte Carlo config")?;
    check_version(cfg.schema_version)?;
    if cfg.cases.is_empty() {
        bail!("field `cases` must list at least one orbit");
    }
    Ok(cfg)
}

impl OrbitConfig {
    /// Noise-free scenario for this orbit.
    pub fn scenario(&self) -> anyhow::Result<Scenario> {
        let body = CentralBody::new(self.mu_km3_s2).context("field `mu_km3_s2`")?;
        let el = &self.elements;
        let elements = OrbitalElements::from_degrees(el.a_km, el.e, el.inc_deg, el.raan_deg, el.argp_deg)
            .context("field `elements`")?;
        let sampling = match (&self.true_anomalies_deg, &self.times_sec) {
            (Some(anomalies), None) => Sampling::TrueAnomaliesDeg(anomalies.clone()),
            (None, Some(times)) => Sampling::TimesSec(times.clone()),
            _ => bail!("exactly one of `true_anomalies_deg` and `times_sec` must be given"),
        };
        if sampling.is_empty() {
            let field = if self.true_anomalies_deg.is_some() { "true_anomalies_deg" } else { "times_sec" };
            bail!("field `{field}` must list at least one sample");
        }
        Ok(Scenario {
            elements,
            body,
            sampling,
            noise_sigma_deg: 0.0,
            noise_model: NoiseModel::default(),
            seed: 0,
        })
    }
}

impl ScenarioConfig {
    pub fn scenario(&self) -> anyhow::Result<Scenario> {
        let sc = Scenario {
            noise_sigma_deg: self.noise_sigma_deg,
            noise_model: self.noise_model.into(),
            seed: self.seed,
            ..self.orbit.scenario()?
        };
        sc.validate().context("invalid scenario")?;
        Ok(sc)
    }
}

impl MonteCarloConfig {
    /// One library config per case. Case `k` uses master seed
    /// `master_seed + k` (wrapping).
    pub fn cases(&self) -> anyhow::Result<Vec<(String, McConfig)>> {
        let options = self.solver.options();
        self.cases
            .iter()
            .enumerate()
            .map(|(k, orbit)| {
                let scenario = Scenario {
                    noise_model: self.noise_model.into(),
                    ..orbit.scenario().with_context(|| format!("case {k}"))?
                };
                let name = orbit.name.clone().unwrap_or_else(|| format!("case{k}"));
                let cfg = McConfig {
                    scenario,
                    trials: self.trials,
                    noise_levels_deg: self.noise_levels_deg.clone(),
                    master_seed: self.master_seed.wrapping_add(k as u64),
                    solve_options: options,
                };
                cfg.validate().with_context(|| format!("case {k}"))?;
                Ok((name, cfg))
            })
            .collect()
    }
}
