//! Attraction velocity pulling the end effector toward the moving goal.

use serde::{Deserialize, Serialize};

use super::params::ControllerParams;
use crate::geometry::Vec3;

/// Detachment factor in `[0, 1]`: 0 at (and inside) the critical distance,
/// approaching 1 several influence distances away.
pub fn beta_factor(d_min: f64, d0: f64, p: &ControllerParams) -> f64 {
    let gap = d_min - p.d_cr;
    if gap <= 0.0 {
        return 0.0;
    }
    let x = gap / d0;
    (2.0 / (1.0 + (-(x * x)).exp()) - 1.0).clamp(0.0, 1.0)
}

/// Accumulated integral term of the attraction law (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AttractionState {
    pub psi_i: Vec3,
}

impl AttractionState {
    /// One explicit-Euler step of the integral term. Frozen while the
    /// obstacle is inside the influence zone.
    pub fn integral_step(&mut self, e: &Vec3, d_min: f64, d0: f64, p: &ControllerParams) {
        if d_min - p.d_cr > d0 {
            self.accumulate(e, p);
        }
    }

    /// Unconditional integration, used while avoidance is disabled.
    pub fn accumulate(&mut self, e: &Vec3, p: &ControllerParams) {
        self.psi_i -= e * (p.ki * p.dt);
    }
}

/// `beta * (-Kp e + psi_i)`.
pub fn attraction_velocity(e: &Vec3, psi_i: &Vec3, beta: f64, p: &ControllerParams) -> Vec3 {
    (psi_i - e * p.kp) * beta
}
