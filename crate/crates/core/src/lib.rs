//! Initial orbit determination from heading-only velocity observations.
//!
//! A spacecraft that can only sense the *direction* of its inertial velocity
//! still carries enough information to recover its orbit: the velocity tip
//! moves on a circle (the hodograph), and the timing between headings pins down
//! the size and offset of that circle. The pipeline is
//!
//! 1. [`plane::estimate_normal`] fits the orbit plane to the headings,
//! 2. [`plane::build_frame`] sets up an in-plane frame,
//! 3. [`solver::solve`] fits the in-plane hodograph to the pairwise times of
//!    flight with Levenberg-Marquardt and converts it back to elements.
//!
//! [`simulate`] generates synthetic observations and [`montecarlo`] runs noisy
//! trials in parallel.

pub mod error;
pub mod hodograph;
pub mod kepler;
pub mod montecarlo;
pub mod plane;
pub mod simulate;
pub mod solver;

pub use nalgebra::Vector3;

pub use error::{IodError, Result};
pub use hodograph::{
    elements_to_hodograph, hodograph_to_elements, CentralBody, HeadingObservation,
    HodographParams, OrbitalElements, PerifocalBasis, RecoveredElements,
};
pub use montecarlo::{run_monte_carlo, McConfig, McResult};
pub use plane::{build_frame, estimate_normal, PlaneFrame};
pub use simulate::{generate_observations, NoiseModel, Sampling, Scenario};
pub use solver::{solve, AnomalyModel, ParamVector, SolveOptions, SolveReport, SolveStage};
