//! Repulsion velocity acting at the robot point closest to the obstacle.
//!
//! The base amplitude superimposes a distance term and an approach-velocity
//! damping term; after every controller switch it is ramped in by
//! `gamma = 1 - exp(-t / tau)` so the commanded velocity cannot jump.

use serde::{Deserialize, Serialize};

use super::params::ControllerParams;
use crate::geometry::{ProximityResult, Vec3};

/// Influence distance, enlarged while the obstacle approaches.
pub fn d0_effective(v_rel: f64, p: &ControllerParams) -> f64 {
    if v_rel < 0.0 {
        p.d_1 - p.c_v * v_rel
    } else {
        p.d_1
    }
}

/// Distance-driven repulsion amplitude. Clamped to `rep_cap`, which is also
/// returned at or inside the critical distance where the law diverges.
pub fn repulsion_distance_term(d_min: f64, d0: f64, p: &ControllerParams) -> f64 {
    let gap = d_min - p.d_cr;
    if gap >= d0 {
        0.0
    } else if gap <= 0.0 {
        p.rep_cap
    } else {
        (p.k1 * (d0 / gap - 1.0)).min(p.rep_cap)
    }
}

/// Proximity weighting of the damping term: 1 below `l1`, 0 above `l2`,
/// raised-cosine blend in between.
pub fn proximity_coefficient(d_min: f64, p: &ControllerParams) -> f64 {
    if d_min <= p.l1 {
        1.0
    } else if d_min >= p.l2 {
        0.0
    } else {
        let x = (d_min - p.l1) / (p.l2 - p.l1);
        0.5 * (1.0 + (std::f64::consts::PI * x).cos())
    }
}

/// Approach-velocity damping amplitude; zero while the obstacle recedes.
pub fn repulsion_velocity_term(v_rel: f64, c: f64, p: &ControllerParams) -> f64 {
    if v_rel < 0.0 {
        -c * p.k2 * v_rel
    } else {
        0.0
    }
}

/// Time of the last controller switch and the resulting ramp factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReshapeState {
    pub t0: f64,
    pub gamma: f64,
}

impl Default for ReshapeState {
    fn default() -> Self {
        ReshapeState { t0: 0.0, gamma: 0.0 }
    }
}

impl ReshapeState {
    /// Restarts the ramp at `now` when `switched`, then evaluates it.
    pub fn update(&mut self, now: f64, switched: bool, tau: f64) -> f64 {
        if switched {
            self.t0 = now;
        }
        self.gamma = reshape_gamma(now - self.t0, tau);
        self.gamma
    }
}

/// `1 - exp(-elapsed / tau)`.
pub fn reshape_gamma(elapsed: f64, tau: f64) -> f64 {
    1.0 - (-elapsed / tau).exp()
}

/// Every intermediate of one repulsion evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Repulsion {
    pub d0: f64,
    pub v_rep1: f64,
    pub c: f64,
    pub v_rep2: f64,
    pub gamma: f64,
    /// `gamma * min(v_rep1 + v_rep2, rep_cap)`.
    pub v_rep_mod: f64,
    /// `v_rep_mod * s`, applied at the robot witness point.
    pub vector: Vec3,
}

/// Repulsion for the current proximity state and ramp factor `gamma`.
pub fn repulsion_vector(prox: &ProximityResult, gamma: f64, p: &ControllerParams) -> Repulsion {
    let d0 = d0_effective(prox.v_rel, p);
    let v_rep1 = repulsion_distance_term(prox.d_min, d0, p);
    let c = proximity_coefficient(prox.d_min, p);
    let v_rep2 = repulsion_velocity_term(prox.v_rel, c, p);
    let v_rep_mod = gamma * (v_rep1 + v_rep2).min(p.rep_cap);
    Repulsion {
        d0,
        v_rep1,
        c,
        v_rep2,
        gamma,
        v_rep_mod,
        vector: prox.s * v_rep_mod,
    }
}
