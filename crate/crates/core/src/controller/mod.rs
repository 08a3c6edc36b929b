//! Joint-velocity avoidance controller.
//!
//! Each tick superimposes two damped least-squares mappings: the attraction
//! velocity at the end effector and the repulsion velocity at the robot
//! witness point of the closest human capsule. The sum is scaled down
//! uniformly if any joint would exceed its velocity limit.

pub mod attraction;
pub mod dls;
pub mod params;
pub mod repulsion;

use log::warn;
use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::ControlError;
use crate::geometry::{ProximityResult, Vec3};
use crate::kinematics::{JointVector, RobotModel, DOF};

pub use attraction::{attraction_velocity, beta_factor, AttractionState};
pub use dls::dls_solve;
pub use params::{ControllerParams, ParamsFile, PARAM_NAMES};
pub use repulsion::{
    d0_effective, proximity_coefficient, repulsion_distance_term, repulsion_vector, repulsion_velocity_term,
    reshape_gamma, Repulsion, ReshapeState,
};

/// Per-tick inputs besides the joint state.
#[derive(Debug, Clone, Copy)]
pub struct ControlInput<'a> {
    /// Closest robot/human pair with `v_rel` filled in.
    pub prox: &'a ProximityResult,
    pub goal: Vec3,
    /// Avoidance enabled for the current task segment.
    pub ca_active: bool,
    /// A controller switch happened on this tick; restarts the repulsion ramp.
    pub switched: bool,
    pub now: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlOutput {
    pub qdot_total: JointVector,
    pub qdot_att: JointVector,
    pub qdot_rep: JointVector,
    pub qdot_posture: JointVector,
    pub v_rep_mod: f64,
    pub v_cp_rep: Vec3,
    pub v_e_att: Vec3,
    pub gamma: f64,
    pub beta: f64,
    pub c: f64,
    pub d0_eff: f64,
    /// Factor (<= 1) applied to the summed joint velocities by saturation.
    pub saturation_scale: f64,
}

/// Controller state owned by the control loop.
#[derive(Debug, Clone)]
pub struct Controller {
    pub params: ControllerParams,
    pub reshape: ReshapeState,
    pub attraction: AttractionState,
    posture_reference: JointVector,
}

impl Controller {
    /// `posture_reference` is the configuration the null-space posture term
    /// returns to (only used when `posture_gain > 0`).
    pub fn new(params: ControllerParams, posture_reference: JointVector) -> Self {
        Controller {
            params,
            reshape: ReshapeState::default(),
            attraction: AttractionState::default(),
            posture_reference,
        }
    }

    pub fn reset(&mut self) {
        self.reshape = ReshapeState::default();
        self.attraction = AttractionState::default();
    }

    pub fn step(&mut self, model: &RobotModel, q: &JointVector, input: ControlInput<'_>) -> Result<ControlOutput, ControlError> {
        let p = &self.params;
        let prox = input.prox;
        let kin = model.kinematic_state(q);
        let p_e = kin.eef_position();
        let e = p_e - input.goal;

        let gamma = self.reshape.update(input.now, input.switched, p.tau);
        let d0 = d0_effective(prox.v_rel, p);

        let (rep, beta) = if input.ca_active {
            self.attraction.integral_step(&e, prox.d_min, d0, p);
            (Some(repulsion_vector(prox, gamma, p)), beta_factor(prox.d_min, d0, p))
        } else {
            self.attraction.accumulate(&e, p);
            (None, 1.0)
        };

        let v_e_att = attraction_velocity(&e, &self.attraction.psi_i, beta, p);
        let qdot_att = dls_solve(&kin.jacobian_eef(), &v_e_att, p.lambda)?;

        let mut qdot_total = qdot_att;
        let mut qdot_rep = JointVector::zeros();
        let (mut v_rep_mod, mut v_cp_rep, mut c) = (0.0, Vec3::zeros(), 0.0);
        if let Some(rep) = rep {
            c = rep.c;
            if rep.v_rep_mod > 0.0 {
                if prox.degenerate {
                    warn!(
                        "t={:.3}: repulsion along fallback direction, axes of {} coincide",
                        input.now,
                        prox.closest_pair_label()
                    );
                }
                let link = model.capsules[prox.robot_index].link;
                let j_cp = kin.jacobian_at_point(link, &prox.r1)?;
                qdot_rep = dls_solve(&j_cp, &rep.vector, p.lambda)?;
                qdot_total += qdot_rep;
                v_rep_mod = rep.v_rep_mod;
                v_cp_rep = rep.vector;
            }
        }

        let mut qdot_posture = JointVector::zeros();
        if p.posture_gain > 0.0 {
            let j_e = kin.jacobian_eef();
            let damped = j_e * j_e.transpose() + nalgebra::Matrix3::identity() * (p.lambda * p.lambda);
            let chol = damped.cholesky().ok_or(ControlError::Singular)?;
            let projector = SMatrix::<f64, DOF, DOF>::identity() - j_e.transpose() * chol.solve(&j_e);
            qdot_posture = projector * (self.posture_reference - q) * p.posture_gain;
            qdot_total += qdot_posture;
        }

        let saturation_scale = saturation_scale(&qdot_total, &model.limits.qdot_max);
        if saturation_scale < 1.0 {
            qdot_total *= saturation_scale;
        }

        Ok(ControlOutput {
            qdot_total,
            qdot_att,
            qdot_rep,
            qdot_posture,
            v_rep_mod,
            v_cp_rep,
            v_e_att,
            gamma,
            beta,
            c,
            d0_eff: d0,
            saturation_scale,
        })
    }
}

/// Uniform scale keeping every joint within its velocity limit.
pub fn saturation_scale(qdot: &JointVector, qdot_max: &JointVector) -> f64 {
    let worst = qdot
        .iter()
        .zip(qdot_max.iter())
        .map(|(v, max)| v.abs() / max)
        .fold(0.0, f64::max);
    if worst > 1.0 {
        1.0 / worst
    } else {
        1.0
    }
}
