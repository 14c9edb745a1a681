//! Shared fixtures for the solver benchmarks.

use hodoiod::simulate::Scenario;
use hodoiod::solver::{InPlaneProblem, DEFAULT_E_MIN};
use hodoiod::plane::frame_from_observations;
use hodoiod::{generate_observations, HeadingObservation, NoiseModel};

/// Observations of the lunar example orbit with the given heading noise.
pub fn lunar(ten: bool, noise_deg: f64) -> Vec<HeadingObservation> {
    let base = if ten { Scenario::lunar_ten() } else { Scenario::lunar_four() };
    generate_observations(&Scenario {
        noise_sigma_deg: noise_deg,
        noise_model: NoiseModel::TangentGaussian,
        seed: 3,
        ..base
    })
    .expect("lunar scenario is valid")
}

/// In-plane least-squares problem for a set of observations.
pub fn in_plane(observations: &[HeadingObservation], mu: f64) -> InPlaneProblem {
    let (_, frame) = frame_from_observations(observations).expect("observations span a plane");
    let headings = observations.iter().map(|o| frame.to_plane(&o.s)).collect();
    let times = observations.iter().map(|o| o.t).collect();
    InPlaneProblem::new(headings, times, mu, DEFAULT_E_MIN).expect("enough observations")
}
