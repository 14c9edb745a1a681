//! Kepler's equation, anomaly conversions and a two-body heading propagator.
//!
//! Kepler's equation is used in its standard elliptical form
//! `M = E - e sin(E)`. Some printed derivations of the hodograph method carry
//! a `+` sign here; that form does not reproduce the published times from
//! periapsis for the lunar example, while this one does to 0.01 min.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::error::{IodError, Result};
use crate::hodograph::{
    elements_to_hodograph, velocity_at_true_anomaly, wrap_pi, wrap_two_pi, CentralBody,
    HodographParams, OrbitalElements,
};

/// Largest eccentricity accepted by the inverse Kepler solver.
pub const MAX_SOLVER_ECCENTRICITY: f64 = 0.999;

const KEPLER_TOL: f64 = 1e-13;
const KEPLER_MAX_ITER: usize = 50;

/// True, eccentric and mean anomaly of one point on an elliptical orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalySet {
    pub theta: f64,
    pub ecc: f64,
    pub mean: f64,
}

impl AnomalySet {
    /// All three anomalies from the true anomaly. `ecc` and `mean` carry the
    /// same revolution count as `theta`.
    pub fn from_true(theta: f64, e: f64) -> Self {
        let ecc = eccentric_from_true(theta, e);
        Self {
            theta,
            ecc,
            mean: mean_from_eccentric(ecc, e),
        }
    }

    pub fn from_mean(mean: f64, e: f64) -> Result<Self> {
        let ecc = eccentric_from_mean(mean, e)?;
        Ok(Self {
            theta: true_from_eccentric(ecc, e),
            ecc,
            mean,
        })
    }
}

/// Mean motion from the hodograph, `n = (R^2 - c.c)^(3/2) / mu`.
pub fn mean_motion(hp: &HodographParams, body: &CentralBody) -> Result<f64> {
    let energy = hp.energy_term();
    if !(energy > 0.0) {
        return Err(IodError::NonElliptical(format!("R^2 - c.c = {energy}")));
    }
    Ok(energy.powf(1.5) / body.mu)
}

/// `M = E - e sin(E)`.
pub fn mean_from_eccentric(ecc: f64, e: f64) -> f64 {
    ecc - e * ecc.sin()
}

/// Inverts Kepler's equation with safeguarded Newton iteration (`E0 = M`,
/// bisection whenever a step leaves the bracket). The result keeps the
/// revolution count of `mean`.
pub fn eccentric_from_mean(mean: f64, e: f64) -> Result<f64> {
    if !(0.0..=MAX_SOLVER_ECCENTRICITY).contains(&e) || !mean.is_finite() {
        return Err(IodError::InvalidInput(format!(
            "inverse Kepler needs 0 <= e <= {MAX_SOLVER_ECCENTRICITY} and finite M (e = {e}, M = {mean})"
        )));
    }
    let reduced = wrap_pi(mean);
    let revolutions = ((mean - reduced) / TAU).round();
    if e == 0.0 {
        return Ok(mean);
    }

    // |E - M| <= e, and the residual changes sign across that interval
    let mut lo = reduced - e;
    let mut hi = reduced + e;
    let mut ecc = reduced;
    for _ in 0..KEPLER_MAX_ITER {
        let residual = ecc - e * ecc.sin() - reduced;
        if residual == 0.0 {
            return Ok(revolutions * TAU + ecc);
        }
        if residual < 0.0 {
            lo = ecc;
        } else {
            hi = ecc;
        }
        let slope = 1.0 - e * ecc.cos();
        let mut next = ecc - residual / slope;
        // converged iterates sit on a bracket end, so the test is inclusive
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - ecc).abs();
        ecc = next;
        if step < KEPLER_TOL || hi - lo < KEPLER_TOL {
            return Ok(revolutions * TAU + ecc);
        }
    }
    Err(IodError::KeplerNonConvergence {
        mean_anomaly: mean,
        eccentricity: e,
    })
}

/// True anomaly in `(-pi, pi]` from `atan2(sqrt(1-e^2) sin(E), cos(E) - e)`.
pub fn true_from_eccentric(ecc: f64, e: f64) -> f64 {
    let (s, c) = ecc.sin_cos();
    ((1.0 - e * e).sqrt() * s).atan2(c - e)
}

/// Eccentric anomaly with the same revolution count as `theta`.
pub fn eccentric_from_true(theta: f64, e: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let principal = ((1.0 - e * e).sqrt() * s).atan2(e + c);
    // both angles share the half-plane of sin, so align the revolution count
    let revolutions = ((theta - wrap_pi(theta)) / TAU).round();
    let mut ecc = principal + revolutions * TAU;
    // principal values can sit on opposite sides of the +/-pi cut
    if (ecc - theta) > PI {
        ecc -= TAU;
    } else if (theta - ecc) > PI {
        ecc += TAU;
    }
    ecc
}

/// Time after periapsis passage at which the orbit reaches `theta`, in
/// `[0, period)`.
pub fn time_since_periapsis(el: &OrbitalElements, body: &CentralBody, theta: f64) -> f64 {
    let ecc = eccentric_from_true(wrap_two_pi(theta), el.e);
    wrap_two_pi(mean_from_eccentric(ecc, el.e)) / el.mean_motion(body)
}

/// Unit heading of the inertial velocity `t_since_periapsis` seconds after
/// periapsis passage.
pub fn propagate_heading(
    el: &OrbitalElements,
    body: &CentralBody,
    t_since_periapsis: f64,
) -> Result<Vector3<f64>> {
    let hp = elements_to_hodograph(el, body)?;
    let mean = wrap_two_pi(el.mean_motion(body) * t_since_periapsis);
    let ecc = eccentric_from_mean(mean, el.e)?;
    let theta = true_from_eccentric(ecc, el.e);
    let v = velocity_at_true_anomaly(&hp, &el.perifocal_basis(), theta);
    Ok(v.normalize())
}
