//! File formats: observation CSV, solution JSON, Monte Carlo CSVs.

use std::io::{Read, Write};

use anyhow::{bail, Context};
use hodoiod::montecarlo::{SummaryRow, TrialRecord};
use hodoiod::{HeadingObservation, SolveReport, SolveStage, Vector3};
use serde::{Deserialize, Serialize};

pub const OBSERVATION_HEADER: [&str; 4] = ["t_sec", "sx", "sy", "sz"];

/// Headings must be unit norm to within this tolerance on read.
pub const UNIT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Serialize, Deserialize)]
struct ObservationRow {
    t_sec: f64,
    sx: f64,
    sy: f64,
    sz: f64,
}

pub fn write_observations<W: Write>(out: W, observations: &[HeadingObservation]) -> anyhow::Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for o in observations {
        writer.serialize(ObservationRow {
            t_sec: o.t,
            sx: o.s.x,
            sy: o.s.y,
            sz: o.s.z,
        })?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads and validates observations; headings are renormalized.
pub fn read_observations<R: Read>(input: R) -> anyhow::Result<Vec<HeadingObservation>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().context("cannot read observation header")?;
    if header.iter().collect::<Vec<_>>() != OBSERVATION_HEADER {
        bail!(
            "observation header must be `{}`, found `{}`",
            OBSERVATION_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        );
    }
    let mut observations = Vec::new();
    for (k, row) in reader.deserialize::<ObservationRow>().enumerate() {
        let line = k + 2;
        let row = row.with_context(|| format!("observation line {line}"))?;
        let s = Vector3::new(row.sx, row.sy, row.sz);
        let norm = s.norm();
        if !((norm - 1.0).abs() <= UNIT_NORM_TOL) {
            bail!("observation line {line}: heading norm {norm} is not 1 within {UNIT_NORM_TOL}");
        }
        observations.push(HeadingObservation::new(s, row.t_sec).with_context(|| format!("observation line {line}"))?);
    }
    Ok(observations)
}

#[derive(Debug, Serialize)]
pub struct HodographJson {
    #[serde(rename = "R_km_s")]
    pub r_km_s: f64,
    pub c_km_s: [f64; 3],
    pub w_hat: [f64; 3],
}

#[derive(Debug, Serialize)]
pub struct InPlaneJson {
    #[serde(rename = "R_km_s")]
    pub r_km_s: f64,
    pub c1_km_s: f64,
    pub c2_km_s: f64,
    pub a_hat: [f64; 3],
    pub b_hat: [f64; 3],
}

#[derive(Debug, Serialize)]
pub struct ElementsJson {
    pub a_km: f64,
    pub e: f64,
    pub inc_deg: f64,
    pub raan_deg: f64,
    pub argp_deg: f64,
    pub raan_undefined: bool,
    pub argp_undefined: bool,
}

#[derive(Debug, Serialize)]
pub struct SolutionJson {
    pub schema_version: u32,
    pub converged: bool,
    pub iterations: usize,
    pub stage: String,
    pub mu_km3_s2: f64,
    pub objective_s2: f64,
    pub plane_residual: f64,
    pub hodograph: HodographJson,
    pub in_plane: InPlaneJson,
    #[serde(rename = "initial_guess_R_km_s")]
    pub initial_guess_r_km_s: f64,
    pub elements: ElementsJson,
    pub residual_history_s2: Vec<f64>,
}

fn array(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

pub fn stage_name(stage: SolveStage) -> String {
    match stage {
        SolveStage::Primary => "primary".into(),
        SolveStage::Refined => "refined".into(),
        SolveStage::Restart(k) => format!("restart_{k}"),
    }
}

impl SolutionJson {
    pub fn from_report(report: &SolveReport, mu: f64) -> Self {
        let el = &report.elements.elements;
        Self {
            schema_version: crate::config::SCHEMA_VERSION,
            converged: report.converged,
            iterations: report.iterations,
            stage: stage_name(report.stage),
            mu_km3_s2: mu,
            objective_s2: report.objective,
            plane_residual: report.plane_residual,
            hodograph: HodographJson {
                r_km_s: report.hodograph.r,
                c_km_s: array(&report.hodograph.c),
                w_hat: array(&report.hodograph.w_hat),
            },
            in_plane: InPlaneJson {
                r_km_s: report.x_star.r,
                c1_km_s: report.x_star.c1,
                c2_km_s: report.x_star.c2,
                a_hat: array(&report.frame.a_hat),
                b_hat: array(&report.frame.b_hat),
            },
            initial_guess_r_km_s: report.initial_guess.r,
            elements: ElementsJson {
                a_km: el.a,
                e: el.e,
                inc_deg: el.inc.to_degrees(),
                raan_deg: el.raan.to_degrees(),
                argp_deg: el.argp.to_degrees(),
                raan_undefined: report.elements.raan_undefined,
                argp_undefined: report.elements.argp_undefined,
            },
            residual_history_s2: report.residual_history.clone(),
        }
    }
}

/// Summary line prefixed by the case name.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryCsvRow {
    pub case: String,
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

impl SummaryCsvRow {
    pub fn new(case: &str, r: &SummaryRow) -> Self {
        Self {
            case: case.to_string(),
            observations: r.observations,
            noise_deg: r.noise_deg,
            trials: r.trials,
            a_sigma_km: r.a_sigma_km,
            e_sigma: r.e_sigma,
            failures: r.failures,
            a_mean_km: r.a_mean_km,
            a_std_km: r.a_std_km,
            e_mean: r.e_mean,
            e_std: r.e_std,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialCsvRow {
    pub case: String,
    pub observations: usize,
    pub trial: usize,
    pub noise_deg: f64,
    pub a_err_km: f64,
    pub e_err: f64,
    pub abs_a_err_km: f64,
    pub abs_e_err: f64,
    pub converged: bool,
}

impl TrialCsvRow {
    pub fn new(case: &str, observations: usize, r: &TrialRecord) -> Self {
        Self {
            case: case.to_string(),
            observations,
            trial: r.trial,
            noise_deg: r.noise_deg,
            a_err_km: r.a_err_km,
            e_err: r.e_err,
            abs_a_err_km: r.a_err_km.abs(),
            abs_e_err: r.e_err.abs(),
            converged: r.converged,
        }
    }
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "case",
    "observations",
    "noise_deg",
    "trials",
    "a_sigma_km",
    "e_sigma",
    "failures",
    "a_mean_km",
    "a_std_km",
    "e_mean",
    "e_std",
];

pub fn write_csv<W: Write, T: Serialize>(out: W, header: &[&str], rows: &[T]) -> anyhow::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub const TRIAL_HEADER: [&str; 9] = [
    "case",
    "observations",
    "trial",
    "noise_deg",
    "a_err_km",
    "e_err",
    "abs_a_err_km",
    "abs_e_err",
    "converged",
];

#[cfg(test)]
pub fn read_summary<R: Read>(input: R) -> anyhow::Result<Vec<SummaryCsvRow>> {
    let mut reader = csv::Reader::from_reader(input);
    reader
        .deserialize()
        .map(|row| row.context("malformed summary row"))
        .collect()
}
