//! Forward kinematics, translational Jacobians and capsule placement for a
//! 7-DOF serial arm with revolute joints.
//!
//! Link frame `i` is `frame(i-1) * Trans(offset_i) * Rot(axis_i, q_i)`, with
//! frame 0 the robot base. The end effector is the origin of frame 7, so a
//! tool is modelled by extending the last joint offset along its axis.

use std::path::Path;

use nalgebra::{Isometry3, Point3, SMatrix, SVector, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};
use crate::geometry::{Capsule, Vec3};

pub const DOF: usize = 7;

pub type JointVector = SVector<f64, DOF>;
/// Linear-velocity Jacobian, one column per joint.
pub type Jacobian = SMatrix<f64, 3, DOF>;

const IIWA14_JSON: &str = include_str!("../data/iiwa14.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    /// Rotation axis in the joint's own frame.
    pub axis: Vec3,
    /// Translation from the previous frame to this joint, in the previous frame.
    pub offset: Vec3,
}

/// A capsule rigidly attached to link `link` (1-based), endpoints in that
/// link's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapsuleBinding {
    pub id: String,
    pub link: usize,
    pub a: Vec3,
    pub b: Vec3,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub q_min: JointVector,
    pub q_max: JointVector,
    pub qdot_max: JointVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    #[serde(default)]
    pub name: String,
    pub joints: Vec<JointSpec>,
    pub capsules: Vec<CapsuleBinding>,
    pub limits: JointLimits,
    /// Maximum curvilinear EEF speed during avoidance (m/s).
    pub v_max: f64,
    /// Maximum EEF acceleration during avoidance (m/s^2).
    pub a_max: f64,
}

impl RobotModel {
    /// KUKA LBR iiwa 14 R820 with a 0.1 m tool on the flange axis.
    pub fn iiwa14() -> Self {
        Self::from_json_str(IIWA14_JSON).expect("embedded iiwa14 model is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let model: RobotModel = serde_json::from_str(text).map_err(|e| Error::json("robot model", e))?;
        Ok(model.normalized()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: RobotModel =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        Ok(model.normalized()?)
    }

    /// Validates the model and normalizes joint axes.
    pub fn normalized(mut self) -> Result<Self, ModelError> {
        self.validate()?;
        for joint in &mut self.joints {
            joint.axis.normalize_mut();
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.joints.len() != DOF {
            return Err(ModelError::JointCount {
                expected: DOF,
                got: self.joints.len(),
            });
        }
        for (i, joint) in self.joints.iter().enumerate() {
            if !(joint.axis.norm() > 1e-12) || !joint.offset.iter().all(|x| x.is_finite()) {
                return Err(ModelError::ZeroAxis(i + 1));
            }
        }
        let l = &self.limits;
        for i in 0..DOF {
            if !(l.q_min[i] < l.q_max[i]) {
                return Err(ModelError::JointRange {
                    joint: i + 1,
                    min: l.q_min[i],
                    max: l.q_max[i],
                });
            }
            if !(l.qdot_max[i] > 0.0) {
                return Err(ModelError::VelocityLimit {
                    joint: i + 1,
                    value: l.qdot_max[i],
                });
            }
        }
        if !(self.v_max > 0.0) {
            return Err(ModelError::NonPositive {
                name: "v_max",
                value: self.v_max,
            });
        }
        if !(self.a_max > 0.0) {
            return Err(ModelError::NonPositive {
                name: "a_max",
                value: self.a_max,
            });
        }
        if self.capsules.is_empty() {
            return Err(ModelError::NoCapsules);
        }
        for binding in &self.capsules {
            if !(1..=DOF).contains(&binding.link) {
                return Err(ModelError::LinkIndex(binding.link));
            }
            Capsule::new(binding.id.clone(), binding.a, binding.b, binding.r)?;
        }
        Ok(())
    }

    /// Sum of joint offset lengths; a Lipschitz bound for the map from joint
    /// angles to any point on the chain.
    pub fn reach(&self) -> f64 {
        self.joints.iter().map(|j| j.offset.norm()).sum()
    }

    /// Base frame followed by the seven link frames.
    pub fn forward_kinematics(&self, q: &JointVector) -> [Isometry3<f64>; DOF + 1] {
        let mut frames = [Isometry3::identity(); DOF + 1];
        let mut current = Isometry3::identity();
        for (i, joint) in self.joints.iter().enumerate() {
            let rot = UnitQuaternion::from_axis_angle(&Unit::new_unchecked(joint.axis), q[i]);
            current = current * Translation3::from(joint.offset) * rot;
            frames[i + 1] = current;
        }
        frames
    }

    pub fn kinematic_state(&self, q: &JointVector) -> KinematicState<'_> {
        KinematicState {
            model: self,
            frames: self.forward_kinematics(q),
        }
    }

    pub fn eef_position(&self, q: &JointVector) -> Vec3 {
        self.kinematic_state(q).eef_position()
    }

    pub fn jacobian_eef(&self, q: &JointVector) -> Jacobian {
        self.kinematic_state(q).jacobian_eef()
    }

    pub fn jacobian_at_point(&self, q: &JointVector, link: usize, point: &Vec3) -> Result<Jacobian, ModelError> {
        self.kinematic_state(q).jacobian_at_point(link, point)
    }

    pub fn robot_capsules(&self, q: &JointVector) -> Vec<Capsule> {
        self.kinematic_state(q).capsules()
    }

    pub fn clamp_to_limits(&self, q: &JointVector) -> JointVector {
        q.zip_zip_map(&self.limits.q_min, &self.limits.q_max, |x, lo, hi| x.clamp(lo, hi))
    }
}

/// Link frames for one joint configuration, reused across the queries of a
/// control tick.
#[derive(Debug, Clone)]
pub struct KinematicState<'a> {
    model: &'a RobotModel,
    pub frames: [Isometry3<f64>; DOF + 1],
}

impl KinematicState<'_> {
    /// Origin of joint `i` (1-based) in the base frame.
    pub fn joint_origin(&self, i: usize) -> Vec3 {
        self.frames[i].translation.vector
    }

    /// Axis of joint `i` (1-based) in the base frame.
    pub fn joint_axis(&self, i: usize) -> Vec3 {
        self.frames[i].rotation * self.model.joints[i - 1].axis
    }

    pub fn eef_position(&self) -> Vec3 {
        self.frames[DOF].translation.vector
    }

    pub fn jacobian_eef(&self) -> Jacobian {
        self.point_jacobian(DOF, &self.eef_position())
    }

    /// Jacobian of `point` (base frame) rigidly attached to link `link`.
    /// Columns of joints distal to `link` are zero.
    pub fn jacobian_at_point(&self, link: usize, point: &Vec3) -> Result<Jacobian, ModelError> {
        if !(1..=DOF).contains(&link) {
            return Err(ModelError::LinkIndex(link));
        }
        Ok(self.point_jacobian(link, point))
    }

    fn point_jacobian(&self, link: usize, point: &Vec3) -> Jacobian {
        let mut jac = Jacobian::zeros();
        for i in 1..=link {
            let col = self.joint_axis(i).cross(&(point - self.joint_origin(i)));
            jac.set_column(i - 1, &col);
        }
        jac
    }

    pub fn capsules(&self) -> Vec<Capsule> {
        self.model
            .capsules
            .iter()
            .map(|b| {
                let frame = &self.frames[b.link];
                Capsule {
                    id: b.id.clone(),
                    a: (frame * Point3::from(b.a)).coords,
                    b: (frame * Point3::from(b.b)).coords,
                    radius: b.r,
                }
            })
            .collect()
    }
}
