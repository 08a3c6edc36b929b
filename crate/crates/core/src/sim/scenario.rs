//! Scenario files: robot, parameters, initial state, human motion and task.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::human::{CapsuleTemplate, HumanTrajectory, Keyframe};
use crate::controller::{ControllerParams, ParamsFile};
use crate::error::{Error, Result};
use crate::kinematics::{JointVector, RobotModel};
use crate::task::TaskPlan;

fn default_speed_limit() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanSpec {
    pub capsules: Vec<CapsuleTemplate>,
    pub keyframes: Vec<Keyframe>,
    /// Live mode: keyframes give only the initial pose, motion comes from
    /// operator commands.
    #[serde(default)]
    pub live: bool,
    #[serde(default = "default_speed_limit")]
    pub speed_limit: f64,
}

impl HumanSpec {
    pub fn trajectory(&self) -> HumanTrajectory {
        HumanTrajectory {
            capsules: self.capsules.clone(),
            keyframes: self.keyframes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Names of values tuned by hand rather than taken from measurements.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calibrated: Vec<String>,
    /// Robot model file, relative to the scenario file. Built-in iiwa14 when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot_model: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsFile,
    pub initial_q: JointVector,
    pub human: HumanSpec,
    pub task: TaskPlan,
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("scenario", e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut scenario = Self::from_json_str(&text)?;
        scenario.base_dir = path.parent().map(Path::to_path_buf);
        if scenario.name.is_empty() {
            if let Some(stem) = path.file_stem() {
                scenario.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(scenario)
    }

    pub fn robot_model(&self) -> Result<RobotModel> {
        match &self.robot_model {
            None => Ok(RobotModel::iiwa14()),
            Some(rel) => {
                let path = match &self.base_dir {
                    Some(dir) if rel.is_relative() => dir.join(rel),
                    _ => rel.clone(),
                };
                RobotModel::load(&path)
            }
        }
    }

    /// Scenario parameters over model defaults, then `overrides` on top.
    pub fn resolve_params(&self, model: &RobotModel, overrides: Option<&ParamsFile>) -> Result<ControllerParams> {
        let merged = match overrides {
            Some(o) => self.params.merged(o),
            None => self.params.clone(),
        };
        Ok(merged.resolve(model)?)
    }

    /// Checks everything except the parameters, which need the model.
    pub fn validate(&self, model: &RobotModel) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Scenario(format!("duration must be positive, got {}", self.duration)));
        }
        if !self.initial_q.iter().all(|q| q.is_finite()) {
            return Err(Error::Scenario("initial_q must be finite".into()));
        }
        let lim = &model.limits;
        for i in 0..self.initial_q.len() {
            if self.initial_q[i] < lim.q_min[i] || self.initial_q[i] > lim.q_max[i] {
                return Err(Error::Scenario(format!(
                    "initial_q[{}] = {} outside joint limits [{}, {}]",
                    i + 1,
                    self.initial_q[i],
                    lim.q_min[i],
                    lim.q_max[i]
                )));
            }
        }
        self.human.trajectory().validate()?;
        if !(self.human.speed_limit > 0.0 && self.human.speed_limit.is_finite()) {
            return Err(Error::Scenario("human speed_limit must be positive".into()));
        }
        self.task.validate()
    }
}
