//! Synthetic heading observations.
//!
//! Both noise models move the heading along a direction with uniform azimuth
//! about it, then renormalize:
//!
//! * [`NoiseModel::AxisTilt`] (default) tilts by a single `N(0, sigma)` angle,
//!   so the RMS deflection is `sigma`.
//! * [`NoiseModel::TangentGaussian`] applies independent `N(0, sigma)`
//!   deflections along two perpendicular tangent axes, so the deflection is
//!   Rayleigh distributed with RMS `sigma * sqrt(2)`. This is the model that
//!   reproduces the published lunar Monte Carlo statistics.
//!
//! Observation `k` draws from its own ChaCha8 stream,
//! `ChaCha8Rng::seed_from_u64(seed)` with `set_stream(k)`, so the output does
//! not depend on the order in which observations are generated.

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{IodError, Result};
use crate::hodograph::{
    elements_to_hodograph, velocity_at_true_anomaly, CentralBody, HeadingObservation,
    OrbitalElements,
};
use crate::kepler::{propagate_heading, time_since_periapsis};

/// Where along the orbit headings are sampled.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// True anomalies in degrees, strictly increasing. Values past 360 fall on
    /// later revolutions.
    TrueAnomaliesDeg(Vec<f64>),
    /// Times since periapsis in seconds, strictly increasing.
    TimesSec(Vec<f64>),
}

impl Sampling {
    pub fn len(&self) -> usize {
        match self {
            Sampling::TrueAnomaliesDeg(v) | Sampling::TimesSec(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `count` anomalies evenly spaced from `first_deg` to `last_deg`.
    pub fn evenly_spaced(first_deg: f64, last_deg: f64, count: usize) -> Self {
        let values = match count {
            0 => Vec::new(),
            1 => vec![first_deg],
            _ => {
                let step = (last_deg - first_deg) / (count - 1) as f64;
                (0..count).map(|k| first_deg + step * k as f64).collect()
            }
        };
        Sampling::TrueAnomaliesDeg(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// One `N(0, sigma)` tilt about a random perpendicular axis.
    #[default]
    AxisTilt,
    /// Independent `N(0, sigma)` deflections along two tangent axes.
    TangentGaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub elements: OrbitalElements,
    pub body: CentralBody,
    pub sampling: Sampling,
    /// Standard deviation of the heading tilt, degrees.
    pub noise_sigma_deg: f64,
    pub noise_model: NoiseModel,
    pub seed: u64,
}

impl Scenario {
    /// Four headings at 5, 70, 140 and 235 degrees of true anomaly on the
    /// lunar example orbit (a = 2173.4 km, e = 0.15, i = 65, raan = 70,
    /// argp = 20 degrees).
    pub fn lunar_four() -> Self {
        Self {
            elements: lunar_orbit(),
            body: CentralBody::moon(),
            sampling: Sampling::TrueAnomaliesDeg(vec![5.0, 70.0, 140.0, 235.0]),
            noise_sigma_deg: 0.0,
            noise_model: NoiseModel::AxisTilt,
            seed: 0,
        }
    }

    /// Ten headings evenly spaced from 15 to 330 degrees of true anomaly on the
    /// same orbit.
    pub fn lunar_ten() -> Self {
        Self {
            sampling: Sampling::evenly_spaced(15.0, 330.0, 10),
            ..Self::lunar_four()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.elements.validate()?;
        if !(self.noise_sigma_deg.is_finite() && self.noise_sigma_deg >= 0.0) {
            return Err(IodError::InvalidInput(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma_deg
            )));
        }
        let values = match &self.sampling {
            Sampling::TrueAnomaliesDeg(v) | Sampling::TimesSec(v) => v,
        };
        if values.is_empty() {
            return Err(IodError::InvalidInput("scenario has no sample points".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IodError::InvalidInput("sample points must be finite".into()));
        }
        if let Some(w) = values.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(IodError::InvalidInput(format!(
                "sample points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(())
    }
}

fn lunar_orbit() -> OrbitalElements {
    OrbitalElements::from_degrees(2173.4, 0.15, 65.0, 70.0, 20.0).expect("valid lunar orbit")
}

/// Orthonormal pair `(u, v)` spanning the plane perpendicular to unit `s`.
pub fn perpendicular_basis(s: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    // cross with the axis least aligned with s
    let helper = if s.x.abs() <= s.y.abs() && s.x.abs() <= s.z.abs() {
        Vector3::x()
    } else if s.y.abs() <= s.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = s.cross(&helper).normalize();
    let v = s.cross(&u);
    (u, v)
}

/// Tilts unit `s` by an `N(0, sigma_deg)` angle about a random perpendicular
/// axis. `sigma_deg = 0` returns `s` unchanged without touching `rng`.
pub fn perturb_heading<R: Rng + ?Sized>(s: &Vector3<f64>, sigma_deg: f64, rng: &mut R) -> Vector3<f64> {
    if sigma_deg == 0.0 {
        return *s;
    }
    let (u, v) = perpendicular_basis(s);
    let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
    let axis = azimuth.cos() * u + azimuth.sin() * v;
    let angle = Normal::new(0.0, sigma_deg.to_radians())
        .expect("finite sigma")
        .sample(rng);
    // Rodrigues rotation with axis perpendicular to s
    (s * angle.cos() + axis.cross(s) * angle.sin()).normalize()
}

/// Deflects unit `s` under `model` with per-axis scale `sigma_deg`.
/// `sigma_deg = 0` returns `s` unchanged without touching `rng`.
pub fn perturb_heading_with<R: Rng + ?Sized>(
    model: NoiseModel,
    s: &Vector3<f64>,
    sigma_deg: f64,
    rng: &mut R,
) -> Vector3<f64> {
    match model {
        NoiseModel::AxisTilt => perturb_heading(s, sigma_deg, rng),
        NoiseModel::TangentGaussian => {
            if sigma_deg == 0.0 {
                return *s;
            }
            let (u, v) = perpendicular_basis(s);
            let normal = Normal::new(0.0, sigma_deg.to_radians()).expect("finite sigma");
            let offset = normal.sample(rng) * u + normal.sample(rng) * v;
            let angle = offset.norm();
            if angle == 0.0 {
                return *s;
            }
            (s * angle.cos() + offset * (angle.sin() / angle)).normalize()
        }
    }
}

/// RNG for observation `index` of a scenario seeded with `seed`.
pub fn observation_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Timed headings for a scenario. Times are seconds since the periapsis
/// passage preceding the first sample.
pub fn generate_observations(sc: &Scenario) -> Result<Vec<HeadingObservation>> {
    sc.validate()?;
    let truth: Vec<(Vector3<f64>, f64)> = match &sc.sampling {
        Sampling::TrueAnomaliesDeg(anomalies) => {
            let hp = elements_to_hodograph(&sc.elements, &sc.body)?;
            let basis = sc.elements.perifocal_basis();
            let period = sc.elements.period(&sc.body);
            anomalies
                .iter()
                .map(|deg| {
                    let revolutions = (deg / 360.0).floor();
                    let theta = (deg - 360.0 * revolutions).to_radians();
                    let t = time_since_periapsis(&sc.elements, &sc.body, theta) + revolutions * period;
                    (velocity_at_true_anomaly(&hp, &basis, theta).normalize(), t)
                })
                .collect()
        }
        Sampling::TimesSec(times) => times
            .iter()
            .map(|&t| propagate_heading(&sc.elements, &sc.body, t).map(|s| (s, t)))
            .collect::<Result<_>>()?,
    };

    truth
        .into_iter()
        .enumerate()
        .map(|(k, (s, t))| {
            let s = if sc.noise_sigma_deg > 0.0 {
                let mut rng = observation_rng(sc.seed, k);
                perturb_heading_with(sc.noise_model, &s, sc.noise_sigma_deg, &mut rng)
            } else {
                s
            };
            HeadingObservation::new(s, t)
        })
        .collect()
}
