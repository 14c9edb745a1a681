//! Orbit-plane estimation and the intermediate in-plane frame.
//!
//! Every heading lies in the orbit plane, so the plane normal is the null
//! vector of the stacked heading matrix. The SVD fixes it only up to sign; the
//! sign is chosen so the headings sweep prograde about the normal: in time
//! order, the consecutive rotation angles (each wrapped onto `[0, 2pi)`) must
//! add up to less than a full turn. For two observations this reduces to
//! `w.(s1 x s2) > 0`.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{IodError, Result};
use crate::hodograph::{wrap_two_pi, HeadingObservation};

/// Minimum ratio between the second and third singular values of the heading
/// matrix for the plane to count as well determined.
pub const MIN_SINGULAR_RATIO: f64 = 10.0;

const MIN_CROSS_NORM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalEstimate {
    pub w_hat: Vector3<f64>,
    /// Largest `|s_i . w_hat|` over the observations.
    pub residual: f64,
    /// Singular values of the heading matrix, descending.
    pub singular_values: [f64; 3],
}

/// Orthonormal frame `{a_hat, b_hat, w_hat}` with rotation `T = [a; b; w]`
/// (rows) taking inertial vectors into in-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFrame {
    pub a_hat: Vector3<f64>,
    pub b_hat: Vector3<f64>,
    pub w_hat: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl PlaneFrame {
    pub fn identity() -> Self {
        Self {
            a_hat: Vector3::x(),
            b_hat: Vector3::y(),
            w_hat: Vector3::z(),
            rotation: Matrix3::identity(),
        }
    }

    /// `T v`.
    pub fn to_plane(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// `T^T v'`.
    pub fn from_plane(&self, v_prime: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * v_prime
    }
}

/// Angle swept from `from` to `to` about `axis`, wrapped onto `[0, 2pi)`.
pub fn swept_angle(axis: &Vector3<f64>, from: &Vector3<f64>, to: &Vector3<f64>) -> f64 {
    wrap_two_pi(axis.dot(&from.cross(to)).atan2(from.dot(to)))
}

/// Time-ordered indices; ties keep input order.
pub(crate) fn time_order(observations: &[HeadingObservation]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..observations.len()).collect();
    order.sort_by(|&i, &j| observations[i].t.total_cmp(&observations[j].t));
    order
}

/// Least-squares orbit normal of at least two headings.
pub fn estimate_normal(observations: &[HeadingObservation]) -> Result<NormalEstimate> {
    if observations.len() < 2 {
        return Err(IodError::InvalidInput(format!(
            "plane estimation needs at least 2 observations, got {}",
            observations.len()
        )));
    }

    // rows go in time order so the result does not depend on input order;
    // pad to 3 rows so the thin SVD always returns the full right basis
    let by_time = time_order(observations);
    let rows = observations.len().max(3);
    let mut stacked = DMatrix::<f64>::zeros(rows, 3);
    for (row, &i) in by_time.iter().enumerate() {
        let s = observations[i].s.normalize();
        stacked.set_row(row, &s.transpose());
    }
    let svd = stacked.svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| IodError::DegenerateGeometry("SVD did not produce right singular vectors".into()))?;

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.map(|k| svd.singular_values[k]);

    if sigma[1] <= 1e-12 * sigma[0] || sigma[1] < MIN_SINGULAR_RATIO * sigma[2] {
        return Err(IodError::DegenerateGeometry(format!(
            "headings are nearly collinear (singular values {:.3e}, {:.3e}, {:.3e})",
            sigma[0], sigma[1], sigma[2]
        )));
    }

    let null = v_t.row(order[2]);
    let mut w_hat = Vector3::new(null[0], null[1], null[2]).normalize();

    let time_ordered: Vec<Vector3<f64>> = by_time
        .into_iter()
        .map(|i| observations[i].s)
        .collect();
    let sweep = |axis: &Vector3<f64>| -> f64 {
        time_ordered
            .windows(2)
            .map(|pair| swept_angle(axis, &pair[0], &pair[1]))
            .sum()
    };
    let forward = sweep(&w_hat);
    let backward = sweep(&-w_hat);
    if backward < forward {
        w_hat = -w_hat;
    }

    let residual = observations
        .iter()
        .map(|obs| obs.s.normalize().dot(&w_hat).abs())
        .fold(0.0, f64::max);

    Ok(NormalEstimate {
        w_hat,
        residual,
        singular_values: sigma,
    })
}

/// Frame from the normal and a reference heading:
/// `b = (s x w) / |s x w|`, `a = b x w`.
pub fn build_frame(w_hat: &Vector3<f64>, s_ref: &Vector3<f64>) -> Result<PlaneFrame> {
    let w_hat = w_hat.normalize();
    let cross = s_ref.cross(&w_hat);
    let cross_norm = cross.norm();
    if !(cross_norm > MIN_CROSS_NORM * s_ref.norm()) {
        return Err(IodError::DegenerateGeometry(
            "reference heading is parallel to the orbit normal".into(),
        ));
    }
    let b_hat = cross / cross_norm;
    let a_hat = b_hat.cross(&w_hat);
    let rotation = Matrix3::from_rows(&[a_hat.transpose(), b_hat.transpose(), w_hat.transpose()]);
    Ok(PlaneFrame {
        a_hat,
        b_hat,
        w_hat,
        rotation,
    })
}

/// Normal estimate plus the frame built on the earliest observation.
pub fn frame_from_observations(
    observations: &[HeadingObservation],
) -> Result<(NormalEstimate, PlaneFrame)> {
    let normal = estimate_normal(observations)?;
    let first = time_order(observations)[0];
    let frame = build_frame(&normal.w_hat, &observations[first].s)?;
    Ok((normal, frame))
}
