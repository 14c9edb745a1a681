use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IodError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-elliptical orbit: {0}")]
    NonElliptical(String),

    #[error("hodograph center is zero; use the regularized (d') eccentric anomaly for circular orbits")]
    CircularCenter,

    #[error("degenerate observation geometry: {0}")]
    DegenerateGeometry(String),

    #[error("kepler solver did not converge for M = {mean_anomaly}, e = {eccentricity}")]
    KeplerNonConvergence { mean_anomaly: f64, eccentricity: f64 },

    #[error("no feasible solver step: {0}")]
    NoFeasibleStep(String),
}

pub type Result<T> = std::result::Result<T, IodError>;
