//! Industrial task layer: a sequence of path segments tracked by a moving
//! goal point, with collision avoidance enabled per segment.
//!
//! On avoidance segments the goal advances while the human is outside the
//! safety zone and freezes while inside (`CaHold`). Work segments ignore the
//! human entirely. Every mode change is reported as a controller switch.

use serde::{Deserialize, Serialize};

use crate::controller::ControllerParams;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

const MIN_SEGMENT_LENGTH: f64 = 1e-9;
const CONTIGUITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskMode {
    #[serde(rename = "CA_TRACK")]
    CaTrack,
    #[serde(rename = "CA_HOLD")]
    CaHold,
    #[serde(rename = "WORK")]
    Work,
    #[serde(rename = "COMPLETE")]
    Complete,
}

impl TaskMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskMode::CaTrack => "CA_TRACK",
            TaskMode::CaHold => "CA_HOLD",
            TaskMode::Work => "WORK",
            TaskMode::Complete => "COMPLETE",
        }
    }
}

impl std::fmt::Display for TaskMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stand-in for a force-controlled work action: the goal waits at the
/// segment end for `dwell_s` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkAction {
    pub dwell_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub start: Vec3,
    pub end: Vec3,
    pub ca_enabled: bool,
    /// Speed of the goal point along the segment (m/s).
    pub goal_speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work_action: Option<WorkAction>,
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn point_at(&self, arc_s: f64) -> Vec3 {
        let len = self.length();
        if arc_s >= len {
            self.end
        } else {
            self.start + (self.end - self.start) * (arc_s / len)
        }
    }
}

/// What the goal does while the human occupies the safety zone on an
/// avoidance segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZonePolicy {
    /// Goal freezes (`CaHold`), integral stops, repulsion acts.
    #[default]
    HoldGoal,
    /// Goal keeps moving and the robot deforms its path around the human;
    /// the mode stays `CaTrack`.
    Continuous,
}

fn default_e_max() -> f64 {
    0.15
}

fn default_goal_tolerance() -> f64 {
    0.005
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPlan {
    #[serde(default)]
    pub segments: Vec<PathSegment>,
    #[serde(default)]
    pub zone_policy: ZonePolicy,
    /// The goal pauses while the tracking error exceeds this (m).
    #[serde(default = "default_e_max")]
    pub e_max: f64,
    /// Tracking error below which a finished segment is left (m).
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    /// Station-keeping target for a plan without segments; defaults to the
    /// initial end-effector position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_point: Option<Vec3>,
}

impl TaskPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Task(msg));
        if !(self.e_max > 0.0) {
            return bad(format!("e_max must be positive, got {}", self.e_max));
        }
        if !(self.goal_tolerance > 0.0) {
            return bad(format!("goal_tolerance must be positive, got {}", self.goal_tolerance));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.length() > MIN_SEGMENT_LENGTH) {
                return bad(format!("segment {} has coincident start and end", i + 1));
            }
            if !(seg.goal_speed > 0.0) {
                return bad(format!("segment {}: goal_speed must be positive", i + 1));
            }
            if let Some(w) = seg.work_action {
                if !(w.dwell_s >= 0.0) {
                    return bad(format!("segment {}: dwell_s must be >= 0", i + 1));
                }
            }
            if i > 0 && (seg.start - self.segments[i - 1].end).norm() > CONTIGUITY_TOLERANCE {
                return bad(format!("segment {} does not start where segment {} ends", i + 1, i));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalState {
    pub segment_index: usize,
    pub arc_s: f64,
    pub p_g: Vec3,
    pub moving: bool,
}

/// Result of one task tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskStep {
    pub goal: GoalState,
    pub mode: TaskMode,
    pub switched: bool,
    /// Avoidance enabled for the controller on this tick.
    pub ca_active: bool,
}

/// Human-in-safety-zone predicate: strictly inside the influence zone.
pub fn safety_zone(d_min: f64, d0: f64, p: &ControllerParams) -> bool {
    d_min - p.d_cr < d0
}

#[derive(Debug, Clone)]
pub struct TaskMachine {
    plan: TaskPlan,
    goal: GoalState,
    mode: TaskMode,
    dwell_elapsed: f64,
    station: bool,
}

impl TaskMachine {
    /// `initial_eef` is the station-keeping target of a plan without segments
    /// and no explicit `hold_point`.
    pub fn new(plan: TaskPlan, initial_eef: Vec3) -> Self {
        let station = plan.segments.is_empty();
        let (p_g, mode) = match plan.segments.first() {
            Some(seg) => (seg.start, if seg.ca_enabled { TaskMode::CaTrack } else { TaskMode::Work }),
            None => (plan.hold_point.unwrap_or(initial_eef), TaskMode::CaTrack),
        };
        TaskMachine {
            plan,
            goal: GoalState {
                segment_index: 0,
                arc_s: 0.0,
                p_g,
                moving: false,
            },
            mode,
            dwell_elapsed: 0.0,
            station,
        }
    }

    pub fn plan(&self) -> &TaskPlan {
        &self.plan
    }

    pub fn goal(&self) -> &GoalState {
        &self.goal
    }

    pub fn mode(&self) -> TaskMode {
        self.mode
    }

    pub fn is_complete(&self) -> bool {
        self.mode == TaskMode::Complete
    }

    fn ca_enabled(&self) -> bool {
        if self.station {
            return true;
        }
        let idx = self.goal.segment_index.min(self.plan.segments.len() - 1);
        self.plan.segments[idx].ca_enabled
    }

    /// Advances the task by one tick of `dt`. Call once per tick before the
    /// controller.
    pub fn step(&mut self, human_in_zone: bool, p_e: &Vec3, dt: f64) -> TaskStep {
        let previous_mode = self.mode;
        let error = (p_e - self.goal.p_g).norm();

        if !self.station && self.mode != TaskMode::Complete {
            let seg = &self.plan.segments[self.goal.segment_index];
            if self.goal.arc_s >= seg.length() {
                let dwell = seg.work_action.map_or(0.0, |w| w.dwell_s);
                if self.dwell_elapsed + 1e-9 < dwell {
                    self.dwell_elapsed += dt;
                } else if error < self.plan.goal_tolerance {
                    self.dwell_elapsed = 0.0;
                    if self.goal.segment_index + 1 < self.plan.segments.len() {
                        self.goal.segment_index += 1;
                        self.goal.arc_s = 0.0;
                        self.goal.p_g = self.plan.segments[self.goal.segment_index].start;
                    } else {
                        self.mode = TaskMode::Complete;
                    }
                }
            }
        }

        if self.mode != TaskMode::Complete {
            self.mode = if self.ca_enabled() {
                if human_in_zone && self.plan.zone_policy == ZonePolicy::HoldGoal {
                    TaskMode::CaHold
                } else {
                    TaskMode::CaTrack
                }
            } else {
                TaskMode::Work
            };
        }

        self.goal.moving = false;
        if !self.station && matches!(self.mode, TaskMode::CaTrack | TaskMode::Work) {
            let seg = &self.plan.segments[self.goal.segment_index];
            let len = seg.length();
            if self.goal.arc_s < len && error <= self.plan.e_max {
                self.goal.arc_s = (self.goal.arc_s + seg.goal_speed * dt).min(len);
                self.goal.p_g = seg.point_at(self.goal.arc_s);
                self.goal.moving = true;
            }
        }

        TaskStep {
            goal: self.goal.clone(),
            mode: self.mode,
            switched: self.mode != previous_mode,
            ca_active: self.ca_enabled(),
        }
    }
}
