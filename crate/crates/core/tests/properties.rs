use std::f64::consts::{PI, TAU};

use hodoiod::hodograph::{
    eccentric_anomaly_from_heading, hodograph_to_elements, velocity_at_true_anomaly,
};
use hodoiod::kepler::{eccentric_from_mean, mean_from_eccentric};
use hodoiod::plane::build_frame;
use hodoiod::simulate::Scenario;
use hodoiod::solver::{mean_anomaly_g, select_k, time_of_flight_f, InPlaneProblem, DEFAULT_E_MIN};
use hodoiod::*;
use proptest::prelude::*;

const MU: f64 = CentralBody::MOON_MU;

/// Perifocal axes built directly from the 3-1-3 rotation matrix.
fn oracle_axes(raan: f64, inc: f64, argp: f64) -> [Vector3<f64>; 3] {
    let (so, co) = raan.sin_cos();
    let (si, ci) = inc.sin_cos();
    let (sw, cw) = argp.sin_cos();
    let p = Vector3::new(co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si);
    let q = Vector3::new(-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si);
    let w = Vector3::new(so * si, -co * si, ci);
    [p, q, w]
}

/// Velocity from the semi-latus rectum form.
fn oracle_velocity(el: &OrbitalElements, theta: f64) -> Vector3<f64> {
    let [p, q, _] = oracle_axes(el.raan, el.inc, el.argp);
    let semi_latus = el.a * (1.0 - el.e * el.e);
    (MU / semi_latus).sqrt() * (-theta.sin() * p + (el.e + theta.cos()) * q)
}

/// Time since periapsis via the half-angle form of the anomaly relation.
fn oracle_time(el: &OrbitalElements, theta: f64) -> f64 {
    let theta = theta.rem_euclid(TAU);
    let ecc = 2.0 * (((1.0 - el.e) / (1.0 + el.e)).sqrt() * (theta / 2.0).tan()).atan();
    let ecc = ecc.rem_euclid(TAU);
    let n = (MU / el.a.powi(3)).sqrt();
    (ecc - el.e * ecc.sin()) / n
}

fn elements() -> impl Strategy<Value = OrbitalElements> {
    (1.1f64..10.0, 0.0f64..0.9, 0.01f64..179.99, 0.0f64..360.0, 0.0f64..360.0).prop_map(
        |(scale, e, inc, raan, argp)| {
            OrbitalElements::from_degrees(scale * 1737.4, e, inc, raan, argp).unwrap()
        },
    )
}

fn angle_diff(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(TAU) - PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn velocity_lies_on_the_hodograph(el in elements(), theta in 0.0f64..TAU) {
        let body = CentralBody::moon();
        let hp = elements_to_hodograph(&el, &body).unwrap();
        let v = velocity_at_true_anomaly(&hp, &el.perifocal_basis(), theta);
        let oracle = oracle_velocity(&el, theta);
        prop_assert!((v - oracle).norm() < 1e-12 * oracle.norm());
        // circularity and planarity
        prop_assert!(((v - hp.c).norm() - hp.r).abs() < 1e-12 * hp.r);
        prop_assert!(v.dot(&hp.w_hat).abs() < 1e-12 * v.norm());
        // angular momentum direction and radius
        let [_, _, w] = oracle_axes(el.raan, el.inc, el.argp);
        prop_assert!((hp.w_hat - w).norm() < 1e-12);
        let h = (MU * el.a * (1.0 - el.e * el.e)).sqrt();
        prop_assert!((hp.r - MU / h).abs() < 1e-12 * hp.r);
    }

    #[test]
    fn elements_round_trip(el in elements()) {
        prop_assume!(el.e > 1e-6);
        let body = CentralBody::moon();
        let back = hodograph_to_elements(&elements_to_hodograph(&el, &body).unwrap(), &body).unwrap();
        prop_assert!(!back.raan_undefined && !back.argp_undefined);
        let b = back.elements;
        prop_assert!((b.a - el.a).abs() < 1e-10 * el.a);
        prop_assert!((b.e - el.e).abs() < 1e-10);
        prop_assert!(angle_diff(b.inc, el.inc).abs() < 1e-10);
        prop_assert!(angle_diff(b.raan, el.raan).abs() < 1e-10);
        // argp is conditioned by 1/e
        prop_assert!(angle_diff(b.argp, el.argp).abs() < 1e-10 / el.e.max(1e-2));
    }

    #[test]
    fn kepler_round_trip(ecc in -10.0f64..10.0, e in 0.0f64..0.99) {
        let m = mean_from_eccentric(ecc, e);
        let back = eccentric_from_mean(m, e).unwrap();
        prop_assert!((back - ecc).abs() < 1e-12, "E {} -> {}", ecc, back);
    }

    #[test]
    fn eccentric_anomaly_satisfies_half_angle_relation(el in elements(), theta in 0.0f64..TAU) {
        prop_assume!(el.e > 1e-3);
        let body = CentralBody::moon();
        let hp = elements_to_hodograph(&el, &body).unwrap();
        let s = oracle_velocity(&el, theta);
        let ecc = eccentric_anomaly_from_heading(&hp, &s).unwrap();
        // tan(E/2) = sqrt((1-e)/(1+e)) tan(theta/2), written without the tangent poles
        let k = ((1.0 - el.e) / (1.0 + el.e)).sqrt();
        let lhs = (ecc / 2.0).sin() * (theta / 2.0).cos();
        let rhs = k * (theta / 2.0).sin() * (ecc / 2.0).cos();
        prop_assert!((lhs - rhs).abs() < 1e-12, "theta {} E {}", theta, ecc);
        // and it is scale invariant
        let scaled = eccentric_anomaly_from_heading(&hp, &(7.5 * s)).unwrap();
        prop_assert!((scaled - ecc).abs() <= 1e-14 * ecc.abs().max(1.0));
    }

    #[test]
    fn pair_time_of_flight_matches_kepler(
        el in elements(),
        theta_i in 0.0f64..TAU,
        sweep in 0.01f64..(TAU - 0.01),
    ) {
        prop_assume!(el.e > 0.01);
        let body = CentralBody::moon();
        let hp = elements_to_hodograph(&el, &body).unwrap();
        let theta_j = theta_i + sweep;
        let si = oracle_velocity(&el, theta_i).normalize();
        let sj = oracle_velocity(&el, theta_j).normalize();
        let frame = build_frame(&hp.w_hat, &si).unwrap();
        let c = frame.to_plane(&hp.c);
        let x = ParamVector::new(hp.r, c.x, c.y);
        let (si, sj) = (frame.to_plane(&si), frame.to_plane(&sj));

        let period = TAU * (el.a.powi(3) / MU).sqrt();
        let expected = (oracle_time(&el, theta_j) - oracle_time(&el, theta_i)).rem_euclid(period);
        let k = select_k(&x, &si, &sj, DEFAULT_E_MIN).unwrap();
        let f = time_of_flight_f(&x, &si, &sj, k, MU, DEFAULT_E_MIN).unwrap();
        prop_assert!(f >= 0.0);
        prop_assert!((f - expected).abs() < 1e-8 * period, "f {} expected {} k {}", f, expected, k);
        // k = 1 exactly when the eccentric anomalies cross apoapsis
        let gi = mean_anomaly_g(&x, &si, DEFAULT_E_MIN).unwrap();
        let gj = mean_anomaly_g(&x, &sj, DEFAULT_E_MIN).unwrap();
        prop_assert_eq!(k == 1, gj < gi);
    }

    #[test]
    fn g_is_invariant_to_heading_scale(
        r in 0.5f64..3.0, e in 0.0f64..0.95, phi in 0.0f64..TAU,
        angle in 0.0f64..TAU, alpha in 0.01f64..100.0,
    ) {
        let x = ParamVector::new(r, r * e * phi.cos(), r * e * phi.sin());
        let s = Vector3::new(angle.cos(), angle.sin(), 0.0);
        let base = mean_anomaly_g(&x, &s, DEFAULT_E_MIN).unwrap();
        let scaled = mean_anomaly_g(&x, &(alpha * s), DEFAULT_E_MIN).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-14 * base.abs().max(1.0));
    }
}

/// Forward differences with step h and h/2 agree to first order.
#[test]
fn jacobian_richardson_consistency() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = rng.random_range(0.5..3.0);
        let e = rng.random_range(0.01..0.8);
        let phi = rng.random_range(0.0..TAU);
        let x = ParamVector::new(r, r * e * phi.cos(), r * e * phi.sin());
        let m = rng.random_range(4..=10);
        let mut angles: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let s: Vec<_> = angles.iter().map(|a| Vector3::new(a.cos(), a.sin(), 0.0)).collect();
        let t: Vec<f64> = (0..m).map(|k| 100.0 * k as f64).collect();
        for model in [AnomalyModel::Switched, AnomalyModel::Continuous] {
            let problem = InPlaneProblem::new(s.clone(), t.clone(), MU, DEFAULT_E_MIN).unwrap().with_model(model);
            let full = problem.jacobian_with_scale(&x, 1.0).unwrap();
            let half = problem.jacobian_with_scale(&x, 0.5).unwrap();
            let rel = (&full - &half).norm() / half.norm();
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-5, "worst relative Jacobian difference {worst:e}");
}

fn lunar_noisy(seed: u64) -> Vec<HeadingObservation> {
    let sc = Scenario {
        noise_sigma_deg: 0.3,
        seed,
        ..Scenario::lunar_ten()
    };
    generate_observations(&sc).unwrap()
}

#[test]
fn time_shift_leaves_solution_unchanged() {
    let body = CentralBody::moon();
    for seed in 0..5 {
        let obs = lunar_noisy(seed);
        let base = solve(&obs, &body, &SolveOptions::default()).unwrap();
        for shift in [-3600.0, 12.5, 86400.0] {
            let shifted: Vec<_> = obs
                .iter()
                .map(|o| HeadingObservation::new(o.s, o.t + shift).unwrap())
                .collect();
            let other = solve(&shifted, &body, &SolveOptions::default()).unwrap();
            let d = (base.x_star.to_vector() - other.x_star.to_vector()).amax();
            assert!(d < 1e-8, "seed {seed} shift {shift}: {d:e}");
        }
    }
}

#[test]
fn observation_order_does_not_matter() {
    let body = CentralBody::moon();
    for seed in 0..5 {
        let obs = lunar_noisy(seed);
        let base = solve(&obs, &body, &SolveOptions::default()).unwrap();
        let mut shuffled = obs.clone();
        shuffled.reverse();
        shuffled.swap(1, 7);
        let other = solve(&shuffled, &body, &SolveOptions::default()).unwrap();
        assert_eq!(base.x_star, other.x_star);
    }
}

#[test]
fn accepted_steps_never_increase_the_objective() {
    let body = CentralBody::moon();
    for seed in 0..20 {
        let report = solve(&lunar_noisy(seed), &body, &SolveOptions::default()).unwrap();
        assert!(report.converged);
        assert!(report.residual_history.windows(2).all(|w| w[1] <= w[0]), "seed {seed}");
        assert_eq!(report.residual_history.len(), report.iterations + 1);
    }
}

#[test]
fn solve_is_bitwise_repeatable() {
    let body = CentralBody::moon();
    let obs = lunar_noisy(3);
    let a = solve(&obs, &body, &SolveOptions::default()).unwrap();
    let b = solve(&obs, &body, &SolveOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn circular_orbit_flags_argument_of_periapsis() {
    let sc = Scenario {
        elements: OrbitalElements::from_degrees(2500.0, 0.0, 30.0, 40.0, 0.0).unwrap(),
        ..Scenario::lunar_four()
    };
    let obs = generate_observations(&sc).unwrap();
    let report = solve(&obs, &sc.body, &SolveOptions::default()).unwrap();
    assert!(report.converged);
    let expected_r = (MU / 2500.0).sqrt();
    assert!((report.x_star.r - expected_r).abs() < 1e-9 * expected_r);
    assert!(report.x_star.center_norm() < 1e-9);
    assert!(report.elements.argp_undefined);
    assert!(!report.elements.raan_undefined);
    assert!((report.elements.elements.a - 2500.0).abs() < 1e-5);
}

#[test]
fn equatorial_orbit_flags_node() {
    let sc = Scenario {
        elements: OrbitalElements::from_degrees(3000.0, 0.3, 0.0, 0.0, 50.0).unwrap(),
        ..Scenario::lunar_four()
    };
    let obs = generate_observations(&sc).unwrap();
    let report = solve(&obs, &sc.body, &SolveOptions::default()).unwrap();
    assert!(report.elements.raan_undefined);
    assert!(!report.elements.argp_undefined);
    let el = report.elements.elements;
    assert!((el.e - 0.3).abs() < 1e-8);
    // longitude of periapsis is measured from x when the node is undefined
    assert!(angle_diff(el.argp, 50f64.to_radians()).abs() < 1e-7);
}

#[test]
fn solver_rejects_bad_inputs() {
    let body = CentralBody::moon();
    let obs = generate_observations(&Scenario::lunar_four()).unwrap();
    let mut dup = obs.clone();
    dup[2].t = dup[1].t;
    assert!(matches!(solve(&dup, &body, &SolveOptions::default()), Err(IodError::InvalidInput(_))));
    let same: Vec<_> = (0..4).map(|k| HeadingObservation::new(Vector3::x(), k as f64).unwrap()).collect();
    assert!(matches!(
        solve(&same, &body, &SolveOptions::default()),
        Err(IodError::DegenerateGeometry(_))
    ));
}

#[test]
fn high_eccentricity_converges_from_circular_start() {
    let sc = Scenario {
        elements: OrbitalElements::from_degrees(8000.0, 0.9, 50.0, 10.0, 200.0).unwrap(),
        sampling: hodoiod::Sampling::TrueAnomaliesDeg(vec![-120.0, -40.0, 0.0, 60.0, 150.0]),
        ..Scenario::lunar_four()
    };
    let obs = generate_observations(&sc).unwrap();
    let report = solve(&obs, &sc.body, &SolveOptions::default()).unwrap();
    assert!(report.converged);
    assert!((report.elements.elements.e - 0.9).abs() < 1e-8);
    assert!((report.elements.elements.a - 8000.0).abs() < 1e-5);
}
