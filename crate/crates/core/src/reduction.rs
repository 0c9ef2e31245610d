//! Reduction of the free pendulum chain to inter-segment angles.
//!
//! The overall rotation about the pivot is cyclic when gravity is off, so
//! the relative angles `beta_i = alpha_{i+1} - alpha_i` and their rates span
//! the 4-dimensional reduced phase space.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sections::PhaseMap;
use crate::systems::pendulum::{segments, CartesianState, PendulumParams, PendulumSystem, Vec2, PENDULUM_DIM};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub beta: [f64; 2],
    pub beta_dot: [f64; 2],
}

impl ReducedState {
    pub fn new(beta1: f64, beta2: f64, beta1_dot: f64, beta2_dot: f64) -> Self {
        Self {
            beta: [wrap_angle(beta1), wrap_angle(beta2)],
            beta_dot: [beta1_dot, beta2_dot],
        }
    }

    /// Phase coordinates `(beta1, beta2, beta1', beta2')`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.beta[0], self.beta[1], self.beta_dot[0], self.beta_dot[1]]
    }

    /// Which phase coordinates are angles.
    pub const ANGULAR: [bool; 4] = [true, true, false, false];
}

/// Absolute segment angles and their rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentAngles {
    pub alpha: [f64; 3],
    pub alpha_dot: [f64; 3],
}

pub fn segment_angles(params: &PendulumParams, s: &CartesianState) -> Result<SegmentAngles> {
    let (d, dd) = segments(params, s);
    let mut alpha = [0.0; 3];
    let mut alpha_dot = [0.0; 3];
    for i in 0..3 {
        let n2 = d[i].norm_squared();
        if n2.sqrt() < 1e-12 || !n2.is_finite() {
            return Err(Error::DegenerateSegment {
                segment: i + 1,
                norm: n2.sqrt(),
            });
        }
        alpha[i] = d[i].y.atan2(d[i].x);
        alpha_dot[i] = (d[i].x * dd[i].y - d[i].y * dd[i].x) / n2;
    }
    Ok(SegmentAngles { alpha, alpha_dot })
}

pub fn reduce(params: &PendulumParams, s: &CartesianState) -> Result<ReducedState> {
    if params.gravity != 0.0 {
        return Err(Error::ReductionInvalid {
            gravity: params.gravity,
        });
    }
    let a = segment_angles(params, s)?;
    Ok(ReducedState::new(
        a.alpha[1] - a.alpha[0],
        a.alpha[2] - a.alpha[1],
        a.alpha_dot[1] - a.alpha_dot[0],
        a.alpha_dot[2] - a.alpha_dot[1],
    ))
}

/// Builds the on-manifold Cartesian state with the given absolute segment angles.
pub fn from_angles(params: &PendulumParams, alpha: [f64; 3], alpha_dot: [f64; 3]) -> CartesianState {
    let [e1, e2] = params.eps;
    let l = params.lengths;
    let u = alpha.map(|a| Vec2::new(a.cos(), a.sin()));
    let up = alpha.map(|a| Vec2::new(-a.sin(), a.cos()));
    let seg: [Vec2; 3] = std::array::from_fn(|i| l[i] * u[i]);
    let seg_v: [Vec2; 3] = std::array::from_fn(|i| l[i] * alpha_dot[i] * up[i]);

    let r1 = seg[0];
    let attach2 = e1 * r1;
    let r2 = attach2 + seg[1];
    let attach3 = attach2 + e2 * seg[1];
    let r3 = attach3 + seg[2];

    let v1 = seg_v[0];
    let w2 = e1 * v1;
    let v2 = w2 + seg_v[1];
    let v3 = w2 + e2 * seg_v[1] + seg_v[2];
    CartesianState::new(0.0, [r1, r2, r3], [v1, v2, v3])
}

/// Inverse of [`reduce`] up to the cyclic angle: segment 1 gets absolute
/// angle `alpha1` and rate `alpha1_dot`.
pub fn embed(params: &PendulumParams, rs: &ReducedState, alpha1: f64, alpha1_dot: f64) -> CartesianState {
    let alpha2 = alpha1 + rs.beta[0];
    let alpha3 = alpha2 + rs.beta[1];
    let w2 = alpha1_dot + rs.beta_dot[0];
    let w3 = w2 + rs.beta_dot[1];
    from_angles(params, [alpha1, alpha2, alpha3], [alpha1_dot, w2, w3])
}

impl PhaseMap<PENDULUM_DIM> for PendulumSystem {
    fn phase(&self, t: f64, y: &[f64; PENDULUM_DIM]) -> Result<[f64; 4]> {
        Ok(reduce(&self.params, &CartesianState::from_array(t, y))?.to_array())
    }

    fn angular_mask(&self) -> [bool; 4] {
        ReducedState::ANGULAR
    }
}
