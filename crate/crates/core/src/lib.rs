//! Velocity-level collision avoidance between a 7-DOF arm and a human, both
//! modeled as capsules.
//!
//! The [`controller`] turns a proximity query and a moving goal point into
//! joint velocities; [`task`] sequences path segments and gates avoidance;
//! [`sim`] closes the loop at a fixed tick; [`bridge`] streams a live run to
//! websocket clients.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod controller;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod sim;
pub mod task;

pub use controller::{Controller, ControllerParams, ParamsFile};
pub use error::{Error, Result};
pub use geometry::{Capsule, ProximityResult, Vec3};
pub use kinematics::{JointVector, RobotModel};
pub use sim::{run_scenario, Scenario, Simulation};
pub use task::{TaskMode, TaskPlan};
