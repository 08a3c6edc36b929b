//! Fixed-timestep closed-loop simulator.
//!
//! One tick: pose the human, pose the robot capsules, query the closest pair
//! and its relative velocity, step the task machine, step the controller,
//! then integrate the joint velocities with limit clamping.

pub mod human;
pub mod scenario;
pub mod trace;

use log::{debug, info};

use crate::controller::{d0_effective, ControlInput, ControlOutput, Controller, ControllerParams, ParamsFile};
use crate::error::{ParamError, Result};
use crate::geometry::{min_distance_robot_human, Capsule, ProximityResult, RelativeVelocityEstimator, Vec3};
use crate::kinematics::{JointVector, RobotModel};
use crate::task::{safety_zone, TaskMachine, TaskMode};

pub use human::{CapsuleTemplate, Endpoints, HumanTrajectory, Keyframe, LiveHuman};
pub use scenario::{HumanSpec, Scenario};
pub use trace::{
    eef_accelerations, eef_velocities, write_trace, Metrics, MetricsBuilder, TraceFormat, TraceRecord, Violation,
    ViolationKind, PENETRATION_TOLERANCE,
};

#[derive(Debug, Clone)]
enum HumanSource {
    Scripted(HumanTrajectory),
    Live(LiveHuman),
}

/// Everything computed on one tick, for observers.
#[derive(Debug, Clone)]
pub struct TickDetail {
    pub record: TraceRecord,
    pub robot_capsules: Vec<Capsule>,
    pub human_capsules: Vec<Capsule>,
    pub proximity: ProximityResult,
    pub control: ControlOutput,
    /// Active task segment (0-based); `None` for a station-keeping plan.
    pub segment_index: Option<usize>,
    pub in_zone: bool,
    pub goal_moving: bool,
    pub switched: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    model: RobotModel,
    initial_params: ControllerParams,
    controller: Controller,
    task: TaskMachine,
    estimator: RelativeVelocityEstimator,
    human: HumanSource,
    q: JointVector,
    tick: u64,
    last_s: Option<Vec3>,
    last: Option<TickDetail>,
}

impl Simulation {
    /// Loads the scenario's robot model and resolves its parameters, with
    /// `overrides` taking precedence.
    pub fn new(scenario: &Scenario, overrides: Option<&ParamsFile>) -> Result<Self> {
        let model = scenario.robot_model()?;
        let params = scenario.resolve_params(&model, overrides)?;
        Self::with_model(scenario, model, params)
    }

    pub fn with_model(scenario: &Scenario, model: RobotModel, params: ControllerParams) -> Result<Self> {
        scenario.validate(&model)?;
        params.validate()?;
        let q = scenario.initial_q;
        let human = if scenario.human.live {
            HumanSource::Live(LiveHuman::new(
                scenario.human.trajectory().pose_at(0.0),
                scenario.human.speed_limit,
            ))
        } else {
            HumanSource::Scripted(scenario.human.trajectory())
        };
        Ok(Simulation {
            task: TaskMachine::new(scenario.task.clone(), model.eef_position(&q)),
            estimator: RelativeVelocityEstimator::new(params.v_rel_smoothing),
            controller: Controller::new(params.clone(), q),
            initial_params: params,
            scenario: scenario.clone(),
            model,
            human,
            q,
            tick: 0,
            last_s: None,
            last: None,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn model(&self) -> &RobotModel {
        &self.model
    }

    pub fn params(&self) -> &ControllerParams {
        &self.controller.params
    }

    pub fn q(&self) -> &JointVector {
        &self.q
    }

    /// Simulated time of the next tick.
    pub fn time(&self) -> f64 {
        self.tick as f64 * self.controller.params.dt
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    pub fn mode(&self) -> TaskMode {
        self.task.mode()
    }

    pub fn last_tick(&self) -> Option<&TickDetail> {
        self.last.as_ref()
    }

    pub fn is_live(&self) -> bool {
        matches!(self.human, HumanSource::Live(_))
    }

    /// Human capsules at the current simulated time.
    pub fn human_capsules(&self) -> Vec<Capsule> {
        match &self.human {
            HumanSource::Scripted(tr) => tr.pose_at(self.time()),
            HumanSource::Live(live) => live.capsules().to_vec(),
        }
    }

    /// Number of ticks covering the scenario duration.
    pub fn tick_count(&self) -> usize {
        (self.scenario.duration / self.controller.params.dt).round() as usize
    }

    /// Changes one controller parameter. Invalid values and the tick period
    /// are rejected without effect.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        if name == "dt" {
            return Err(ParamError::OutOfRange {
                name: name.into(),
                value,
                reason: "the tick period is fixed while running",
            });
        }
        self.controller.params.set(name, value)?;
        if name == "v_rel_smoothing" {
            self.estimator.set_alpha(value);
        }
        Ok(())
    }

    /// Steers a live human capsule toward new endpoints. Returns the speed
    /// actually used after clamping to the human speed limit.
    pub fn set_human_target(&mut self, id: &str, a: Vec3, b: Vec3, max_speed: f64) -> Result<f64, String> {
        match &mut self.human {
            HumanSource::Live(live) => live.set_target(id, a, b, max_speed),
            HumanSource::Scripted(_) => Err("human targets need a live scenario".into()),
        }
    }

    /// Back to the scenario's initial state and parameters.
    pub fn reset(&mut self) {
        let fresh = Self::with_model(&self.scenario, self.model.clone(), self.initial_params.clone())
            .expect("scenario was valid at construction");
        *self = fresh;
    }

    pub fn step(&mut self) -> Result<&TickDetail> {
        let p = &self.controller.params;
        let dt = p.dt;
        let t = self.time();

        let human = self.human_capsules();
        let kin = self.model.kinematic_state(&self.q);
        let robot = kin.capsules();
        let p_e = kin.eef_position();

        let mut prox = min_distance_robot_human(&robot, &human, self.last_s)?;
        prox.v_rel = self.estimator.update(prox.d_min, dt);
        if !prox.degenerate {
            self.last_s = Some(prox.s);
        }

        let d0 = d0_effective(prox.v_rel, p);
        let in_zone = safety_zone(prox.d_min, d0, p);
        let task = self.task.step(in_zone, &p_e, dt);
        if task.switched {
            debug!("t={t:.2}: mode {}", task.mode);
        }

        let control = self.controller.step(
            &self.model,
            &self.q,
            ControlInput {
                prox: &prox,
                goal: task.goal.p_g,
                ca_active: task.ca_active,
                switched: task.switched,
                now: t,
            },
        )?;

        let record = TraceRecord {
            t,
            q: self.q,
            qdot_cmd: control.qdot_total,
            p_e,
            p_g: task.goal.p_g,
            d_min: prox.d_min,
            v_rel: prox.v_rel,
            v_rep_mod: control.v_rep_mod,
            gamma: control.gamma,
            beta: control.beta,
            mode: task.mode,
            closest_pair: prox.closest_pair_label(),
        };

        self.q = self.model.clamp_to_limits(&(self.q + control.qdot_total * dt));
        if let HumanSource::Live(live) = &mut self.human {
            live.advance(dt);
        }
        self.tick += 1;

        Ok(self.last.insert(TickDetail {
            record,
            robot_capsules: robot,
            human_capsules: human,
            proximity: prox,
            control,
            segment_index: (!self.task.plan().segments.is_empty()).then_some(task.goal.segment_index),
            in_zone,
            goal_moving: task.goal.moving,
            switched: task.switched,
        }))
    }

    /// Runs the remaining ticks of the scenario duration.
    pub fn run(&mut self) -> Result<RunOutput> {
        let n = self.tick_count().saturating_sub(self.tick as usize);
        let mut metrics = MetricsBuilder::new(self.controller.params.d_cr, self.controller.params.dt);
        let mut trace = Vec::with_capacity(n);
        for _ in 0..n {
            let detail = self.step()?;
            metrics.observe(&detail.record, detail.segment_index);
            trace.push(detail.record.clone());
        }
        let metrics = metrics.finish(&trace, &self.scenario.name, self.scenario.seed);
        info!(
            "{}: {} ticks, min d_min {:.4} m at t={:.2}, completion {:?}",
            self.scenario.name, metrics.ticks, metrics.min_d_min, metrics.min_d_min_t, metrics.completion_time
        );
        Ok(RunOutput { trace, metrics })
    }
}

/// Loads, simulates and measures a scenario.
pub fn run_scenario(scenario: &Scenario, overrides: Option<&ParamsFile>) -> Result<RunOutput> {
    Simulation::new(scenario, overrides)?.run()
}
