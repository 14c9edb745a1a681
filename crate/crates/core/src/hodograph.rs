//! Orbital hodograph algebra.
//!
//! For any Keplerian orbit the tip of the inertial velocity vector traces a
//! circle (the hodograph) of radius `R = mu / h` centred at `c = R e q_hat`,
//! where `{p_hat, q_hat, w_hat}` is the perifocal frame. Everything in this
//! module is a pure function of its inputs: conversions between classical
//! elements and hodograph parameters, velocity along the circle, the heading
//! angle, and the eccentric anomaly recovered from a heading direction.
//!
//! Units are km, km/s, s and radians throughout.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::error::{IodError, Result};

/// Eccentricity at or below which the argument of periapsis is reported as
/// undefined when converting hodograph parameters to elements.
pub const ELEMENT_CIRCULAR_THRESHOLD: f64 = 1e-10;

/// `sin(inc)` at or below which the ascending node is reported as undefined.
pub const EQUATORIAL_THRESHOLD: f64 = 1e-12;

/// Wraps an angle onto `[0, 2pi)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Wraps an angle onto `(-pi, pi]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let wrapped = wrap_two_pi(angle);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralBody {
    /// Gravitational parameter, km^3/s^2.
    pub mu: f64,
}

impl CentralBody {
    /// Gravitational parameter of the Moon used by the worked lunar example.
    pub const MOON_MU: f64 = 4902.8;

    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(IodError::InvalidInput(format!(
                "gravitational parameter must be positive and finite, got {mu}"
            )));
        }
        Ok(Self { mu })
    }

    pub fn moon() -> Self {
        Self { mu: Self::MOON_MU }
    }
}

/// Classical elements of an elliptical orbit. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    /// Semi-major axis, km.
    pub a: f64,
    pub e: f64,
    pub inc: f64,
    pub raan: f64,
    pub argp: f64,
}

impl OrbitalElements {
    pub fn new(a: f64, e: f64, inc: f64, raan: f64, argp: f64) -> Result<Self> {
        let el = Self { a, e, inc, raan, argp };
        el.validate()?;
        Ok(el)
    }

    /// Builds elements from angles given in degrees.
    pub fn from_degrees(a: f64, e: f64, inc: f64, raan: f64, argp: f64) -> Result<Self> {
        Self::new(a, e, inc.to_radians(), raan.to_radians(), argp.to_radians())
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.a, self.e, self.inc, self.raan, self.argp]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(IodError::InvalidInput("orbital elements must be finite".into()));
        }
        if self.a <= 0.0 {
            return Err(IodError::InvalidInput(format!(
                "semi-major axis must be positive, got {}",
                self.a
            )));
        }
        if self.e < 0.0 {
            return Err(IodError::InvalidInput(format!(
                "eccentricity must be non-negative, got {}",
                self.e
            )));
        }
        if self.e >= 1.0 {
            return Err(IodError::NonElliptical(format!("eccentricity {} >= 1", self.e)));
        }
        if !(0.0..=PI).contains(&self.inc) {
            return Err(IodError::InvalidInput(format!(
                "inclination must lie in [0, pi], got {}",
                self.inc
            )));
        }
        Ok(())
    }

    /// Specific angular momentum, km^2/s.
    pub fn angular_momentum(&self, body: &CentralBody) -> f64 {
        (body.mu * self.a * (1.0 - self.e * self.e)).sqrt()
    }

    /// Mean motion, rad/s.
    pub fn mean_motion(&self, body: &CentralBody) -> f64 {
        (body.mu / self.a.powi(3)).sqrt()
    }

    pub fn period(&self, body: &CentralBody) -> f64 {
        TAU / self.mean_motion(body)
    }

    /// Perifocal frame from the orientation angles (3-1-3 rotation).
    pub fn perifocal_basis(&self) -> PerifocalBasis {
        let (so, co) = self.raan.sin_cos();
        let (si, ci) = self.inc.sin_cos();
        let (sw, cw) = self.argp.sin_cos();
        PerifocalBasis {
            p_hat: Vector3::new(co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si),
            q_hat: Vector3::new(-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si),
            w_hat: Vector3::new(so * si, -co * si, ci),
        }
    }
}

/// Elements recovered from a hodograph, with flags for angles that are
/// undefined by convention (set to zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredElements {
    pub elements: OrbitalElements,
    pub raan_undefined: bool,
    pub argp_undefined: bool,
}

/// Hodograph circle: radius, centre and orbit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HodographParams {
    /// Radius, km/s.
    pub r: f64,
    /// Centre, km/s.
    pub c: Vector3<f64>,
    pub w_hat: Vector3<f64>,
}

impl HodographParams {
    pub fn new(r: f64, c: Vector3<f64>, w_hat: Vector3<f64>) -> Result<Self> {
        let hp = Self { r, c, w_hat };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(IodError::InvalidInput(format!(
                "hodograph radius must be positive, got {}",
                self.r
            )));
        }
        if !self.c.iter().chain(self.w_hat.iter()).all(|v| v.is_finite()) {
            return Err(IodError::InvalidInput("hodograph vectors must be finite".into()));
        }
        if (self.w_hat.norm() - 1.0).abs() > 1e-9 {
            return Err(IodError::InvalidInput(format!(
                "orbit normal must be a unit vector, norm = {}",
                self.w_hat.norm()
            )));
        }
        if self.c.dot(&self.w_hat).abs() > 1e-9 * self.r {
            return Err(IodError::InvalidInput(
                "hodograph centre must lie in the orbit plane".into(),
            ));
        }
        if self.c.norm() >= self.r {
            return Err(IodError::NonElliptical(format!(
                "|c| = {} >= R = {}",
                self.c.norm(),
                self.r
            )));
        }
        Ok(())
    }

    pub fn eccentricity(&self) -> f64 {
        self.c.norm() / self.r
    }

    /// `R^2 - c.c`, positive for elliptical orbits.
    pub fn energy_term(&self) -> f64 {
        self.r * self.r - self.c.norm_squared()
    }
}

/// Right-handed perifocal triad: `p_hat` toward periapsis, `w_hat` along the
/// angular momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerifocalBasis {
    pub p_hat: Vector3<f64>,
    pub q_hat: Vector3<f64>,
    pub w_hat: Vector3<f64>,
}

impl PerifocalBasis {
    /// Recovers the perifocal triad from a hodograph: `q_hat = c/|c|`,
    /// `p_hat = q_hat x w_hat`. Only defined for non-circular orbits.
    pub fn from_hodograph(hp: &HodographParams) -> Result<Self> {
        let c_norm = hp.c.norm();
        if c_norm <= ELEMENT_CIRCULAR_THRESHOLD * hp.r {
            return Err(IodError::CircularCenter);
        }
        let q_hat = hp.c / c_norm;
        let w_hat = hp.w_hat.normalize();
        Ok(Self {
            p_hat: q_hat.cross(&w_hat),
            q_hat,
            w_hat,
        })
    }
}

/// Unit-norm inertial heading with its observation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingObservation {
    pub s: Vector3<f64>,
    /// Observation time, s.
    pub t: f64,
}

impl HeadingObservation {
    /// Normalizes `s` on ingest. Rejects zero or non-finite headings.
    pub fn new(s: Vector3<f64>, t: f64) -> Result<Self> {
        let norm = s.norm();
        if !(norm.is_finite() && norm > 0.0 && t.is_finite()) {
            return Err(IodError::InvalidInput(format!(
                "heading must be non-zero and finite with a finite time (|s| = {norm}, t = {t})"
            )));
        }
        Ok(Self { s: s / norm, t })
    }
}

/// Hodograph parameters of an elliptical orbit: `R = mu/h`, `c = R e q_hat`.
pub fn elements_to_hodograph(el: &OrbitalElements, body: &CentralBody) -> Result<HodographParams> {
    el.validate()?;
    let basis = el.perifocal_basis();
    let r = body.mu / el.angular_momentum(body);
    Ok(HodographParams {
        r,
        c: r * el.e * basis.q_hat,
        w_hat: basis.w_hat,
    })
}

/// Classical elements from the hodograph using the default circular threshold.
pub fn hodograph_to_elements(hp: &HodographParams, body: &CentralBody) -> Result<RecoveredElements> {
    hodograph_to_elements_with_threshold(hp, body, ELEMENT_CIRCULAR_THRESHOLD)
}

/// Classical elements from the hodograph. Orbits with `e <= circular_threshold`
/// have `argp` set to zero and flagged; equatorial orbits have `raan` set to
/// zero and flagged, in which case `argp` is measured from the inertial x axis.
pub fn hodograph_to_elements_with_threshold(
    hp: &HodographParams,
    body: &CentralBody,
    circular_threshold: f64,
) -> Result<RecoveredElements> {
    hp.validate()?;
    let e = hp.eccentricity();
    let a = body.mu / hp.energy_term();
    let w_hat = hp.w_hat.normalize();
    let inc = w_hat.z.clamp(-1.0, 1.0).acos();

    // node line: z_hat x w_hat
    let node = Vector3::new(-w_hat.y, w_hat.x, 0.0);
    let (raan, node_hat, raan_undefined) = if node.norm() <= EQUATORIAL_THRESHOLD {
        (0.0, Vector3::x(), true)
    } else {
        (wrap_two_pi(node.y.atan2(node.x)), node.normalize(), false)
    };

    let (argp, argp_undefined) = if e <= circular_threshold {
        (0.0, true)
    } else {
        let q_hat = hp.c / hp.c.norm();
        let p_hat = q_hat.cross(&w_hat);
        let argp = w_hat.dot(&node_hat.cross(&p_hat)).atan2(node_hat.dot(&p_hat));
        (wrap_two_pi(argp), false)
    };

    Ok(RecoveredElements {
        elements: OrbitalElements { a, e, inc, raan, argp },
        raan_undefined,
        argp_undefined,
    })
}

/// Velocity on the hodograph, `v = R(-sin(theta) p_hat + cos(theta) q_hat) + c`.
pub fn velocity_at_true_anomaly(
    hp: &HodographParams,
    basis: &PerifocalBasis,
    theta: f64,
) -> Vector3<f64> {
    let (s, c) = theta.sin_cos();
    hp.r * (-s * basis.p_hat + c * basis.q_hat) + hp.c
}

/// Heading angle measured from `q_hat` toward the direction of motion,
/// `atan2(sin(theta), e + cos(theta))` wrapped onto `[0, 2pi)`.
pub fn heading_angle(e: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    wrap_two_pi(s.atan2(e + c))
}

/// Eccentric anomaly in `(-pi, pi]` from a heading direction:
/// `E = atan2(sqrt(R^2 - c.c) w.(c x s), R c.s)`. Any positive scaling of
/// `s` gives the same value.
pub fn eccentric_anomaly_from_heading(hp: &HodographParams, s: &Vector3<f64>) -> Result<f64> {
    if hp.c.norm() <= ELEMENT_CIRCULAR_THRESHOLD * hp.r {
        return Err(IodError::CircularCenter);
    }
    let energy = hp.energy_term();
    if energy <= 0.0 {
        return Err(IodError::NonElliptical(format!("R^2 - c.c = {energy}")));
    }
    let y = energy.sqrt() * hp.w_hat.dot(&hp.c.cross(s));
    let x = hp.r * hp.c.dot(s);
    Ok(y.atan2(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table1() -> OrbitalElements {
        OrbitalElements::from_degrees(2173.4, 0.15, 65.0, 70.0, 20.0).unwrap()
    }

    #[test]
    fn table1_hodograph_matches_worked_example() {
        let hp = elements_to_hodograph(&table1(), &CentralBody::moon()).unwrap();
        assert!((hp.r - 1.5191).abs() < 5e-5, "R = {}", hp.r);
        let expected = Vector3::new(-0.1117, -0.0423, 0.1941);
        for k in 0..3 {
            assert!((hp.c[k] - expected[k]).abs() < 5e-5, "c = {:?}", hp.c);
        }
    }

    #[test]
    fn moon_mu_reproduces_radius() {
        // R = mu / sqrt(mu a (1 - e^2)), evaluated directly
        let mu: f64 = 4902.8;
        let r = mu / (mu * 2173.4 * (1.0 - 0.15f64.powi(2))).sqrt();
        assert!((r - 1.5191).abs() < 5e-5);
    }

    #[test]
    fn circular_orbit_has_zero_center() {
        let body = CentralBody::moon();
        let el = OrbitalElements::from_degrees(2000.0, 0.0, 30.0, 40.0, 50.0).unwrap();
        let hp = elements_to_hodograph(&el, &body).unwrap();
        assert_eq!(hp.c.norm(), 0.0);
        assert_relative_eq!(hp.r, (body.mu / 2000.0).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn equatorial_orbit_aligns_with_inertial_axes() {
        let el = OrbitalElements::new(2173.4, 0.15, 0.0, 0.0, 0.0).unwrap();
        let hp = elements_to_hodograph(&el, &CentralBody::moon()).unwrap();
        assert_relative_eq!(hp.w_hat, Vector3::z(), epsilon = 1e-15);
        assert_relative_eq!(hp.c, hp.r * 0.15 * Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_elliptical() {
        assert!(matches!(
            OrbitalElements::new(7000.0, 1.0, 0.1, 0.0, 0.0),
            Err(IodError::NonElliptical(_))
        ));
        let hp = HodographParams {
            r: 1.0,
            c: Vector3::new(1.2, 0.0, 0.0),
            w_hat: Vector3::z(),
        };
        assert!(matches!(
            hodograph_to_elements(&hp, &CentralBody::moon()),
            Err(IodError::NonElliptical(_))
        ));
    }

    #[test]
    fn worked_example_vectors_give_table1_shape() {
        let hp = HodographParams {
            r: 1.5191,
            c: Vector3::new(-0.1117, -0.0423, 0.1941),
            w_hat: Vector3::new(0.8516, -0.3100, 0.4226).normalize(),
        };
        // rounded inputs are only orthogonal to ~1e-4, so skip validate()
        let e = hp.eccentricity();
        let a = CentralBody::MOON_MU / hp.energy_term();
        assert!((a - 2173.4).abs() < 0.1, "a = {a}");
        assert!((e - 0.150).abs() < 1e-3, "e = {e}");
    }

    #[test]
    fn zero_center_is_circular_and_flagged() {
        let body = CentralBody::moon();
        let hp = HodographParams::new(1.5191, Vector3::zeros(), Vector3::z()).unwrap();
        let rec = hodograph_to_elements(&hp, &body).unwrap();
        assert_eq!(rec.elements.e, 0.0);
        assert_relative_eq!(rec.elements.a, body.mu / (1.5191 * 1.5191), max_relative = 1e-15);
        assert!(rec.argp_undefined && rec.raan_undefined);
        assert_eq!(rec.elements.argp, 0.0);
    }

    #[test]
    fn periapsis_velocity() {
        let body = CentralBody::moon();
        let el = table1();
        let hp = elements_to_hodograph(&el, &body).unwrap();
        let basis = el.perifocal_basis();
        let v = velocity_at_true_anomaly(&hp, &basis, 0.0);
        assert_relative_eq!(v.norm(), hp.r * (1.0 + el.e), max_relative = 1e-14);
        assert_relative_eq!(v.normalize(), basis.q_hat, epsilon = 1e-14);
    }

    #[test]
    fn table2_headings_from_velocity() {
        let el = table1();
        let hp = elements_to_hodograph(&el, &CentralBody::moon()).unwrap();
        let basis = el.perifocal_basis();
        let cases = [
            (5.0, [-0.5028, -0.2557, 0.8257]),
            (235.0, [0.3900, 0.9135, -0.1158]),
        ];
        for (theta, expect) in cases {
            let s = velocity_at_true_anomaly(&hp, &basis, f64::to_radians(theta)).normalize();
            for k in 0..3 {
                assert!((s[k] - expect[k]).abs() < 5e-5, "theta {theta}: {s:?}");
            }
        }
    }

    #[test]
    fn heading_angles_match_table3() {
        for (theta, beta) in [(5.0, 4.35), (70.0, 62.36), (140.0, 133.78), (235.0, 242.66)] {
            let got = heading_angle(0.15, f64::to_radians(theta)).to_degrees();
            assert!((got - beta).abs() < 0.005, "theta {theta}: beta {got}");
        }
    }

    #[test]
    fn circular_heading_angle_equals_true_anomaly() {
        for k in 0..36 {
            let theta = k as f64 * 10.0_f64.to_radians();
            assert_relative_eq!(heading_angle(0.0, theta), wrap_two_pi(theta), epsilon = 1e-14);
        }
    }

    #[test]
    fn eccentric_anomaly_matches_table3() {
        let el = table1();
        let hp = elements_to_hodograph(&el, &CentralBody::moon()).unwrap();
        let basis = el.perifocal_basis();
        for (theta, ecc) in [(70.0, 62.09), (140.0, 134.11)] {
            let s = velocity_at_true_anomaly(&hp, &basis, f64::to_radians(theta)).normalize();
            let got = eccentric_anomaly_from_heading(&hp, &s).unwrap().to_degrees();
            assert!((got - ecc).abs() < 0.005, "theta {theta}: E {got}");
        }
        // published rounded headings
        let s2 = Vector3::new(-0.3918, -0.9122, 0.1204);
        let got = eccentric_anomaly_from_heading(&hp, &s2).unwrap().to_degrees();
        assert!((got - 62.09).abs() < 0.01, "E = {got}");
    }

    #[test]
    fn heading_along_center_is_periapsis() {
        let hp = elements_to_hodograph(&table1(), &CentralBody::moon()).unwrap();
        assert_eq!(eccentric_anomaly_from_heading(&hp, &hp.c).unwrap(), 0.0);
    }

    #[test]
    fn zero_center_eccentric_anomaly_is_an_error() {
        let hp = HodographParams::new(1.5, Vector3::zeros(), Vector3::z()).unwrap();
        assert_eq!(
            eccentric_anomaly_from_heading(&hp, &Vector3::x()),
            Err(IodError::CircularCenter)
        );
    }

    #[test]
    fn heading_normalized_on_ingest() {
        let obs = HeadingObservation::new(Vector3::new(3.0, 0.0, 4.0), 1.0).unwrap();
        assert_relative_eq!(obs.s.norm(), 1.0, epsilon = 1e-15);
        assert!(HeadingObservation::new(Vector3::zeros(), 0.0).is_err());
        assert!(HeadingObservation::new(Vector3::x(), f64::NAN).is_err());
    }

    #[test]
    fn equatorial_elements_flag_node() {
        let body = CentralBody::moon();
        let el = OrbitalElements::new(2173.4, 0.15, 0.0, 0.0, 0.3).unwrap();
        let rec = hodograph_to_elements(&elements_to_hodograph(&el, &body).unwrap(), &body).unwrap();
        assert!(rec.raan_undefined);
        assert!(!rec.argp_undefined);
        assert_relative_eq!(rec.elements.argp, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn wrap_helpers() {
        assert_eq!(wrap_two_pi(-1e-300), 0.0);
        assert_relative_eq!(wrap_two_pi(-0.5), TAU - 0.5);
        assert_relative_eq!(wrap_pi(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_eq!(wrap_pi(PI), PI);
    }
}
