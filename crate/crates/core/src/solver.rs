//! Heading-only initial orbit determination.
//!
//! Headings are rotated into the in-plane frame `{a_hat, b_hat, w_hat}` and the
//! in-plane hodograph `x = [R, c1', c2']` is refined by Levenberg-Marquardt so
//! that the time of flight predicted between every pair of observations
//! matches the measured one. Starting from a circular orbit, the eccentric
//! anomaly of each heading is measured from the regularized centre direction
//! `d'`, turned into a mean anomaly with Kepler's equation, and differenced
//! across pairs:
//!
//! ```text
//! f(x, s_i, s_j) = mu (R^2 - c'.c')^(-3/2) [2 pi k + g(x, s_j) - g(x, s_i)]
//! ```
//!
//! with `k` in `{0, 1}` chosen so the prediction is non-negative. All
//! `m (m - 1) / 2` pairs are weighted equally.
//!
//! `g` returns mean anomalies in `(-pi, pi]`, so `k = 1` marks pairs whose
//! eccentric anomalies straddle the `+/-pi` cut at apoapsis.
//!
//! Below `e_min` the switched centre direction cannot represent the orbit
//! exactly, so a fit that ends there (or fails) is refined with the
//! [`AnomalyModel::Continuous`] form, which predicts the same times above
//! `e_min` and stays smooth through `e = 0`. If that still does not fit, a
//! fixed grid of eccentric starting points is tried.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{IodError, Result};
use crate::hodograph::{
    hodograph_to_elements_with_threshold, wrap_two_pi, CentralBody, HeadingObservation, HodographParams,
    RecoveredElements,
};
use crate::plane::{frame_from_observations, swept_angle, time_order, PlaneFrame};

/// Eccentricity below which the centre direction is replaced by `[1, 0, 0]`.
pub const DEFAULT_E_MIN: f64 = 1e-3;

/// Minimum number of headings for a solution.
pub const MIN_OBSERVATIONS: usize = 4;

const FD_REL_STEP: f64 = 1e-7;
const FD_MIN_STEP: f64 = 1e-7;
const STEP_TOL: f64 = 1e-12;
const OBJECTIVE_TOL: f64 = 1e-20;
const MAX_DAMPING: f64 = 1e32;
/// A stalled run counts as converged when the undamped model promised less
/// than this fraction of the objective; forward differences cannot resolve
/// the minimum any closer.
const STALL_REL_TOL: f64 = 1e-10;
/// Objectives within this relative gap are treated as the same minimum.
const SAME_MINIMUM_REL: f64 = 1e-6;

/// Eccentricities of the deterministic restart grid.
const RESTART_ECCENTRICITIES: [f64; 5] = [0.05, 0.2, 0.4, 0.6, 0.8];
const RESTART_DIRECTIONS: usize = 8;

/// In-plane hodograph parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamVector {
    /// Hodograph radius, km/s.
    pub r: f64,
    /// In-plane centre along `a_hat`, km/s.
    pub c1: f64,
    /// In-plane centre along `b_hat`, km/s.
    pub c2: f64,
}

impl ParamVector {
    pub fn new(r: f64, c1: f64, c2: f64) -> Self {
        Self { r, c1, c2 }
    }

    pub fn circular(r: f64) -> Self {
        Self { r, c1: 0.0, c2: 0.0 }
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.r, self.c1, self.c2)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    /// `c' = [c1, c2, 0]`.
    pub fn center(&self) -> Vector3<f64> {
        Vector3::new(self.c1, self.c2, 0.0)
    }

    pub fn center_norm(&self) -> f64 {
        self.c1.hypot(self.c2)
    }

    pub fn eccentricity(&self) -> f64 {
        self.center_norm() / self.r
    }

    /// `R^2 - c'.c'`.
    pub fn energy_term(&self) -> f64 {
        self.r * self.r - self.c1 * self.c1 - self.c2 * self.c2
    }

    /// `R > 0` and `R^2 > c'.c'`.
    pub fn is_feasible(&self) -> bool {
        self.r.is_finite()
            && self.c1.is_finite()
            && self.c2.is_finite()
            && self.r > 0.0
            && self.energy_term() > 0.0
    }

    /// Mean motion, rad/s.
    pub fn mean_motion(&self, mu: f64) -> f64 {
        self.energy_term().powf(1.5) / mu
    }

    fn check(&self) -> Result<()> {
        if self.is_feasible() {
            Ok(())
        } else {
            Err(IodError::NonElliptical(format!(
                "x = [{}, {}, {}] is not an elliptical hodograph",
                self.r, self.c1, self.c2
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub e_min: f64,
    pub max_iterations: usize,
    /// Retry from a fixed grid of eccentric starting points when the circular
    /// start does not reach a fit.
    pub restarts: bool,
    /// Objective (s^2) above which the restart grid is tried.
    pub restart_objective: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            e_min: DEFAULT_E_MIN,
            max_iterations: 100,
            restarts: true,
            restart_objective: 1e-8,
        }
    }
}

/// How the solver measures the anomaly of a heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnomalyModel {
    /// Mean anomaly from the regularized centre direction `d'`.
    #[default]
    Switched,
    /// Mean longitude from `a_hat`, `E + psi - e sin(E)` with `psi` the angle
    /// of `c'`. Time differences match `Switched` whenever `|c'|/R > e_min`.
    Continuous,
}

/// Which run produced the reported solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStage {
    /// Circular initial guess with the switched model.
    Primary,
    /// Continuous model started from the primary result.
    Refined,
    /// Continuous model from the given point of the restart grid.
    Restart(usize),
}

/// One row of the iteration history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Sum of squared time-of-flight residuals, s^2.
    pub objective: f64,
    pub x: ParamVector,
    pub damping: f64,
}

/// Result of a single Levenberg-Marquardt run.
#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub x: ParamVector,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x_star: ParamVector,
    pub initial_guess: ParamVector,
    pub hodograph: HodographParams,
    pub elements: RecoveredElements,
    pub frame: PlaneFrame,
    /// Accepted LM steps of the reported run.
    pub iterations: usize,
    /// Objective after each accepted step, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub objective: f64,
    pub converged: bool,
    /// Largest `|s_i . w_hat|`.
    pub plane_residual: f64,
    /// Run that produced `x_star`; `iterations` and `history` belong to it.
    pub stage: SolveStage,
}

/// `d' = c'` when `|c'|/R > e_min`, otherwise `[1, 0, 0]`.
pub fn regularized_center(x: &ParamVector, e_min: f64) -> Vector3<f64> {
    if x.eccentricity() > e_min {
        x.center()
    } else {
        Vector3::x()
    }
}

#[inline]
fn mean_anomaly_unchecked(x: &ParamVector, s: &Vector3<f64>, e_min: f64) -> f64 {
    let c_norm = x.center_norm();
    let e = c_norm / x.r;
    let (d1, d2) = if e > e_min { (x.c1, x.c2) } else { (1.0, 0.0) };
    // w' = [0, 0, 1] in the in-plane frame
    let y = x.energy_term().sqrt() * (d1 * s.y - d2 * s.x);
    let xx = x.r * (d1 * s.x + d2 * s.y);
    let ecc = y.atan2(xx);
    ecc - e * ecc.sin()
}

#[inline]
fn mean_longitude_unchecked(x: &ParamVector, s: &Vector3<f64>) -> f64 {
    if x.c1 == 0.0 && x.c2 == 0.0 {
        return s.y.atan2(s.x);
    }
    let e = x.eccentricity();
    let y = x.energy_term().sqrt() * (x.c1 * s.y - x.c2 * s.x);
    let xx = x.r * (x.c1 * s.x + x.c2 * s.y);
    let ecc = y.atan2(xx);
    ecc + x.c2.atan2(x.c1) - e * ecc.sin()
}

/// Mean anomaly of an in-plane heading `s'` under the hodograph `x`.
/// Invariant under positive rescaling of `s'`.
pub fn mean_anomaly_g(x: &ParamVector, s_prime: &Vector3<f64>, e_min: f64) -> Result<f64> {
    x.check()?;
    Ok(mean_anomaly_unchecked(x, s_prime, e_min))
}

/// Time of flight from `s_i` to `s_j` for a given periapsis-count `k`.
pub fn time_of_flight_f(
    x: &ParamVector,
    s_i: &Vector3<f64>,
    s_j: &Vector3<f64>,
    k: u32,
    mu: f64,
    e_min: f64,
) -> Result<f64> {
    x.check()?;
    let g_i = mean_anomaly_unchecked(x, s_i, e_min);
    let g_j = mean_anomaly_unchecked(x, s_j, e_min);
    Ok((TAU * f64::from(k) + g_j - g_i) / x.mean_motion(mu))
}

#[inline]
fn k_for(delta_mean: f64) -> u32 {
    if delta_mean < 0.0 {
        1
    } else {
        0
    }
}

/// `k = 0` unless that makes the time of flight negative, then `k = 1`.
pub fn select_k(x: &ParamVector, s_i: &Vector3<f64>, s_j: &Vector3<f64>, e_min: f64) -> Result<u32> {
    x.check()?;
    let delta = mean_anomaly_unchecked(x, s_j, e_min) - mean_anomaly_unchecked(x, s_i, e_min);
    Ok(k_for(delta))
}

/// Circular-orbit initial guess `[R0, 0, 0]`, with `R0` the mean over all
/// pairs of `(mu (beta_j - beta_i) / (t_j - t_i))^(1/3)`. Heading changes are
/// measured about the in-plane normal and wrapped onto `[0, 2pi)`.
pub fn initial_guess(s_prime: &[Vector3<f64>], times: &[f64], mu: f64) -> Result<ParamVector> {
    if s_prime.len() != times.len() {
        return Err(IodError::InvalidInput("headings and times differ in length".into()));
    }
    if s_prime.len() < 2 {
        return Err(IodError::InvalidInput("initial guess needs at least 2 observations".into()));
    }
    let normal = Vector3::z();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..s_prime.len() {
        for j in i + 1..s_prime.len() {
            let dt = times[j] - times[i];
            if !(dt > 0.0) {
                return Err(IodError::InvalidInput(format!(
                    "observation times must be strictly increasing (t[{i}] = {}, t[{j}] = {})",
                    times[i], times[j]
                )));
            }
            let d_beta = swept_angle(&normal, &s_prime[i], &s_prime[j]);
            sum += (mu * d_beta / dt).cbrt();
            count += 1;
        }
    }
    let r0 = sum / count as f64;
    if !(r0 > 0.0) {
        return Err(IodError::DegenerateGeometry(
            "headings do not change between observations".into(),
        ));
    }
    Ok(ParamVector::circular(r0))
}

/// Time-of-flight least-squares problem in the in-plane frame.
#[derive(Debug, Clone)]
pub struct InPlaneProblem {
    headings: Vec<Vector3<f64>>,
    times: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    mu: f64,
    e_min: f64,
    model: AnomalyModel,
}

impl InPlaneProblem {
    /// `headings` are in-plane and time-ordered with strictly increasing times.
    pub fn new(headings: Vec<Vector3<f64>>, times: Vec<f64>, mu: f64, e_min: f64) -> Result<Self> {
        if headings.len() != times.len() || headings.len() < 2 {
            return Err(IodError::InvalidInput(
                "need at least two headings with one time each".into(),
            ));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(IodError::InvalidInput(format!(
                "observation times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let m = headings.len();
        let pairs = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        Ok(Self {
            headings,
            times,
            pairs,
            mu,
            e_min,
            model: AnomalyModel::Switched,
        })
    }

    pub fn with_model(mut self, model: AnomalyModel) -> Self {
        self.model = model;
        self
    }

    pub fn model(&self) -> AnomalyModel {
        self.model
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn headings(&self) -> &[Vector3<f64>] {
        &self.headings
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn initial_guess(&self) -> Result<ParamVector> {
        initial_guess(&self.headings, &self.times, self.mu)
    }

    /// Predicted time of flight for every pair with `k` re-selected at `x`.
    /// `None` outside the elliptical domain.
    pub fn predicted(&self, x: &ParamVector) -> Option<Vec<f64>> {
        if !x.is_feasible() {
            return None;
        }
        let inv_n = self.mu / x.energy_term().powf(1.5);
        let predicted = match self.model {
            AnomalyModel::Switched => {
                let mean: Vec<f64> = self
                    .headings
                    .iter()
                    .map(|s| mean_anomaly_unchecked(x, s, self.e_min))
                    .collect();
                self.pairs
                    .iter()
                    .map(|&(i, j)| {
                        let delta = mean[j] - mean[i];
                        (TAU * f64::from(k_for(delta)) + delta) * inv_n
                    })
                    .collect()
            }
            AnomalyModel::Continuous => {
                let longitude: Vec<f64> =
                    self.headings.iter().map(|s| mean_longitude_unchecked(x, s)).collect();
                self.pairs
                    .iter()
                    .map(|&(i, j)| wrap_two_pi(longitude[j] - longitude[i]) * inv_n)
                    .collect()
            }
        };
        Some(predicted)
    }

    /// `dt_measured - dt_predicted` per pair.
    pub fn residuals(&self, x: &ParamVector) -> Option<DVector<f64>> {
        let predicted = self.predicted(x)?;
        Some(DVector::from_iterator(
            self.pairs.len(),
            self.pairs
                .iter()
                .zip(predicted)
                .map(|(&(i, j), f)| self.times[j] - self.times[i] - f),
        ))
    }

    /// Sum of squared time residuals, s^2.
    pub fn objective(&self, x: &ParamVector) -> Option<f64> {
        self.residuals(x).map(|r| r.norm_squared())
    }

    /// Forward-difference Jacobian of the predicted times of flight, with
    /// per-component step `step_scale * max(1e-7, 1e-7 |x_c|)`. Falls back to
    /// a backward difference when the forward point is infeasible.
    pub fn jacobian_with_scale(&self, x: &ParamVector, step_scale: f64) -> Option<DMatrix<f64>> {
        let base = self.predicted(x)?;
        let xv = x.to_vector();
        let mut jac = DMatrix::zeros(self.pairs.len(), 3);
        for c in 0..3 {
            let h = step_scale * (FD_REL_STEP * xv[c].abs()).max(FD_MIN_STEP);
            let mut shifted = xv;
            shifted[c] += h;
            let (values, signed_h) = match self.predicted(&ParamVector::from_vector(&shifted)) {
                Some(v) => (v, h),
                None => {
                    shifted[c] = xv[c] - h;
                    (self.predicted(&ParamVector::from_vector(&shifted))?, -h)
                }
            };
            for (row, (fv, f0)) in values.iter().zip(&base).enumerate() {
                jac[(row, c)] = (fv - f0) / signed_h;
            }
        }
        Some(jac)
    }

    pub fn jacobian(&self, x: &ParamVector) -> Option<DMatrix<f64>> {
        self.jacobian_with_scale(x, 1.0)
    }

    /// Levenberg-Marquardt from `start`: damping `lambda I` initialised to
    /// `1e-3 mean(diag J^T J)`, divided by 10 on accepted steps and multiplied
    /// by 10 on rejected or infeasible ones.
    pub fn levenberg_marquardt(&self, start: ParamVector, max_iterations: usize) -> Result<LmOutcome> {
        let mut x = start;
        let mut residual = self.residuals(&x).ok_or_else(|| {
            IodError::NonElliptical(format!("starting point {start:?} is not elliptical"))
        })?;
        let mut objective = residual.norm_squared();
        let mut jac = self
            .jacobian(&x)
            .ok_or_else(|| IodError::NoFeasibleStep("jacobian undefined at start".into()))?;
        let mut normal = jac.tr_mul(&jac);
        let mean_diag = normal.diagonal().mean();
        let mut damping = if mean_diag > 0.0 { 1e-3 * mean_diag } else { 1e-3 };

        let mut history = vec![IterationRecord {
            iteration: 0,
            objective,
            x,
            damping,
        }];
        let mut iterations = 0;
        let mut converged = objective < OBJECTIVE_TOL;

        'outer: while !converged && iterations < max_iterations {
            if iterations > 0 {
                jac = match self.jacobian(&x) {
                    Some(j) => j,
                    None => break,
                };
                normal = jac.tr_mul(&jac);
            }
            let gradient = jac.tr_mul(&residual);
            let normal3 = Matrix3::from_fn(|r, c| normal[(r, c)]);
            let gradient3 = Vector3::new(gradient[0], gradient[1], gradient[2]);
            let step_tol = STEP_TOL * (1.0 + x.to_vector().norm());
            // reduction promised by the linear model at the first trial step
            let mut first_predicted: Option<f64> = None;
            let stalled_at_minimum =
                |predicted: Option<f64>, objective: f64| predicted.is_some_and(|p| p <= STALL_REL_TOL * objective);

            loop {
                let damped = normal3 + Matrix3::identity() * damping;
                let Some(step) = damped.cholesky().map(|ch| ch.solve(&gradient3)) else {
                    damping *= 10.0;
                    if damping > MAX_DAMPING {
                        break 'outer;
                    }
                    continue;
                };
                if step.amax() < step_tol {
                    // a tiny first step means a stationary point; a tiny step
                    // forced by inflated damping means we are stuck, unless
                    // the model had nothing left to gain
                    converged = first_predicted.is_none() || stalled_at_minimum(first_predicted, objective);
                    break 'outer;
                }
                if first_predicted.is_none() {
                    first_predicted = Some(step.dot(&(2.0 * gradient3 - normal3 * step)));
                }

                let trial = ParamVector::from_vector(&(x.to_vector() + step));
                if let Some(trial_residual) = self.residuals(&trial) {
                    let trial_objective = trial_residual.norm_squared();
                    if trial_objective < objective {
                        x = trial;
                        residual = trial_residual;
                        objective = trial_objective;
                        damping /= 10.0;
                        iterations += 1;
                        history.push(IterationRecord {
                            iteration: iterations,
                            objective,
                            x,
                            damping,
                        });
                        if objective < OBJECTIVE_TOL || step.amax() < step_tol {
                            converged = true;
                        }
                        break;
                    }
                }
                damping *= 10.0;
                if damping > MAX_DAMPING {
                    converged = stalled_at_minimum(first_predicted, objective);
                    break 'outer;
                }
            }
        }

        Ok(LmOutcome {
            x,
            objective,
            iterations,
            converged,
            history,
        })
    }

    /// Deterministic restart points: eccentricities from a fixed list and
    /// evenly spaced centre directions, with `R` scaled so the mean motion of
    /// the circular guess is preserved.
    pub fn restart_points(guess: &ParamVector) -> Vec<ParamVector> {
        let mut points = Vec::with_capacity(RESTART_ECCENTRICITIES.len() * RESTART_DIRECTIONS);
        for &e in &RESTART_ECCENTRICITIES {
            let r = guess.r / (1.0 - e * e).sqrt();
            for k in 0..RESTART_DIRECTIONS {
                let phi = TAU * k as f64 / RESTART_DIRECTIONS as f64;
                points.push(ParamVector::new(r, r * e * phi.cos(), r * e * phi.sin()));
            }
        }
        points
    }

    /// A run is acceptable when it converged and the observations span less
    /// than one period of the recovered orbit.
    pub fn acceptable(&self, outcome: &LmOutcome) -> bool {
        outcome.converged && TAU / outcome.x.mean_motion(self.mu) > self.span()
    }

    /// Prefers acceptable runs, then a clearly lower objective; runs that
    /// reach the same minimum keep `current`.
    fn improves_on(&self, candidate: &LmOutcome, current: &LmOutcome) -> bool {
        match (self.acceptable(candidate), self.acceptable(current)) {
            (true, false) => true,
            (false, true) => false,
            _ => {
                let margin = (SAME_MINIMUM_REL * current.objective).max(OBJECTIVE_TOL);
                candidate.objective < current.objective - margin
            }
        }
    }

    fn fits(&self, outcome: &LmOutcome, options: &SolveOptions) -> bool {
        self.acceptable(outcome) && outcome.objective <= options.restart_objective
    }
}

/// Determines the orbit from at least four timed headings.
pub fn solve(
    observations: &[HeadingObservation],
    body: &CentralBody,
    options: &SolveOptions,
) -> Result<SolveReport> {
    if observations.len() < MIN_OBSERVATIONS {
        return Err(IodError::InvalidInput(format!(
            "need at least {MIN_OBSERVATIONS} observations, got {}",
            observations.len()
        )));
    }
    if !(options.e_min >= 0.0 && options.e_min < 1.0) {
        return Err(IodError::InvalidInput(format!("e_min must lie in [0, 1), got {}", options.e_min)));
    }

    let order = time_order(observations);
    let (normal, frame) = frame_from_observations(observations)?;
    let headings: Vec<Vector3<f64>> = order
        .iter()
        .map(|&i| frame.to_plane(&observations[i].s))
        .collect();
    let times: Vec<f64> = order.iter().map(|&i| observations[i].t).collect();
    let problem = InPlaneProblem::new(headings, times, body.mu, options.e_min)?;

    let guess = problem.initial_guess()?;
    let primary = problem.levenberg_marquardt(guess, options.max_iterations)?;
    let mut stage = SolveStage::Primary;
    let mut outcome = primary;

    if options.restarts {
        let smooth = problem.clone().with_model(AnomalyModel::Continuous);
        if !problem.fits(&outcome, options) || outcome.x.eccentricity() <= options.e_min {
            if let Ok(refined) = smooth.levenberg_marquardt(outcome.x, options.max_iterations) {
                if smooth.improves_on(&refined, &outcome) {
                    stage = SolveStage::Refined;
                    outcome = refined;
                }
            }
        }
        if !smooth.fits(&outcome, options) {
            for (index, start) in InPlaneProblem::restart_points(&guess).into_iter().enumerate() {
                let Ok(candidate) = smooth.levenberg_marquardt(start, options.max_iterations) else {
                    continue;
                };
                if smooth.improves_on(&candidate, &outcome) {
                    stage = SolveStage::Restart(index);
                    outcome = candidate;
                }
            }
        }
    }
    let acceptable = problem.acceptable(&outcome);

    let x = outcome.x;
    let c = x.c1 * frame.a_hat + x.c2 * frame.b_hat;
    let hodograph = HodographParams {
        r: x.r,
        c,
        w_hat: frame.w_hat,
    };
    let elements = hodograph_to_elements_with_threshold(&hodograph, body, options.e_min)?;

    Ok(SolveReport {
        x_star: x,
        initial_guess: guess,
        hodograph,
        elements,
        frame,
        iterations: outcome.iterations,
        residual_history: outcome.history.iter().map(|h| h.objective).collect(),
        history: outcome.history,
        objective: outcome.objective,
        converged: acceptable,
        plane_residual: normal.residual,
        stage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn converged_x() -> ParamVector {
        ParamVector::new(1.519126, -0.227213, 0.017277)
    }

    #[test]
    fn regularized_center_branches() {
        assert_eq!(regularized_center(&ParamVector::circular(1.4989), DEFAULT_E_MIN), Vector3::x());
        let x = ParamVector::new(1.5191, -0.2272, 0.0173);
        assert_eq!(regularized_center(&x, DEFAULT_E_MIN), Vector3::new(-0.2272, 0.0173, 0.0));
        // boundary is exclusive
        let x = ParamVector::new(2.0, 2.0 * DEFAULT_E_MIN, 0.0);
        assert_eq!(x.eccentricity(), DEFAULT_E_MIN);
        assert_eq!(regularized_center(&x, DEFAULT_E_MIN), Vector3::x());
    }

    #[test]
    fn circular_branch_measures_from_a_axis() {
        let x = ParamVector::circular(1.5);
        for deg in [10.0f64, 95.0, 170.0, -60.0] {
            let a = deg.to_radians();
            let s = Vector3::new(a.cos(), a.sin(), 0.0);
            assert_relative_eq!(mean_anomaly_g(&x, &s, DEFAULT_E_MIN).unwrap(), a, epsilon = 1e-14);
        }
    }

    #[test]
    fn g_is_scale_invariant() {
        let x = converged_x();
        let s = Vector3::new(0.3, -0.8, 0.0);
        let base = mean_anomaly_g(&x, &s, DEFAULT_E_MIN).unwrap();
        for alpha in [0.5, 2.0, 10.0] {
            assert_eq!(mean_anomaly_g(&x, &(alpha * s), DEFAULT_E_MIN).unwrap(), base);
        }
    }

    #[test]
    fn g_rejects_non_elliptical() {
        let x = ParamVector::new(1.0, 1.0, 0.5);
        assert!(mean_anomaly_g(&x, &Vector3::x(), DEFAULT_E_MIN).is_err());
        assert!(time_of_flight_f(&x, &Vector3::x(), &Vector3::y(), 0, 1.0, DEFAULT_E_MIN).is_err());
    }

    #[test]
    fn equal_headings() {
        let x = converged_x();
        let s = Vector3::new(0.6, 0.8, 0.0);
        assert_eq!(select_k(&x, &s, &s, DEFAULT_E_MIN).unwrap(), 0);
        let mu = CentralBody::MOON_MU;
        assert_eq!(time_of_flight_f(&x, &s, &s, 0, mu, DEFAULT_E_MIN).unwrap(), 0.0);
        let period = time_of_flight_f(&x, &s, &s, 1, mu, DEFAULT_E_MIN).unwrap();
        let expected = TAU / x.mean_motion(mu);
        assert_relative_eq!(period, expected, max_relative = 1e-14);
    }

    #[test]
    fn initial_guess_is_exact_for_circular_pair() {
        let mu = CentralBody::MOON_MU;
        let r = 1.6;
        let n = r * r * r / mu;
        let dt = 1000.0;
        let angle = n * dt;
        let s = [Vector3::x(), Vector3::new(angle.cos(), angle.sin(), 0.0)];
        let guess = initial_guess(&s, &[0.0, dt], mu).unwrap();
        assert_relative_eq!(guess.r, r, max_relative = 1e-13);
        assert_eq!((guess.c1, guess.c2), (0.0, 0.0));
    }

    #[test]
    fn initial_guess_errors() {
        let s = [Vector3::x(), Vector3::y()];
        assert!(initial_guess(&s, &[1.0, 1.0], 1.0).is_err());
        let same = [Vector3::x(), Vector3::x()];
        assert!(matches!(
            initial_guess(&same, &[0.0, 1.0], 1.0),
            Err(IodError::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn problem_rejects_unordered_times() {
        let s = vec![Vector3::x(), Vector3::y(), -Vector3::x()];
        assert!(InPlaneProblem::new(s, vec![0.0, 2.0, 2.0], 1.0, DEFAULT_E_MIN).is_err());
    }

    #[test]
    fn pair_count_is_m_choose_two() {
        for m in 2..12usize {
            let s: Vec<_> = (0..m)
                .map(|k| {
                    let a = 0.3 * k as f64;
                    Vector3::new(a.cos(), a.sin(), 0.0)
                })
                .collect();
            let t: Vec<_> = (0..m).map(|k| k as f64).collect();
            let problem = InPlaneProblem::new(s, t, 1.0, DEFAULT_E_MIN).unwrap();
            assert_eq!(problem.pairs().len(), m * (m - 1) / 2);
            let jac = problem.jacobian(&ParamVector::circular(1.0)).unwrap();
            assert_eq!(jac.shape(), (m * (m - 1) / 2, 3));
        }
    }

    #[test]
    fn restart_grid_preserves_mean_motion() {
        let guess = ParamVector::circular(1.5);
        let points = InPlaneProblem::restart_points(&guess);
        assert_eq!(points.len(), 40);
        for p in points {
            assert_relative_eq!(p.energy_term(), 2.25, max_relative = 1e-12);
        }
    }

    #[test]
    fn solve_needs_four_observations() {
        let obs: Vec<_> = (0..3)
            .map(|k| HeadingObservation::new(Vector3::new(1.0, k as f64, 0.0), k as f64).unwrap())
            .collect();
        assert!(matches!(
            solve(&obs, &CentralBody::moon(), &SolveOptions::default()),
            Err(IodError::InvalidInput(_))
        ));
    }
}
