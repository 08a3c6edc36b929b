use log::{error, info};

use super::protocol::{Ack, Command, Hello, StateFrame, PROTOCOL_VERSION};
use crate::error::Result;
use crate::sim::Simulation;

/// A live simulation driven tick by tick, with operator commands applied
/// between ticks.
#[derive(Debug, Clone)]
pub struct LiveSession {
    sim: Simulation,
    paused: bool,
}

impl LiveSession {
    pub fn new(sim: Simulation) -> Self {
        LiveSession { sim, paused: false }
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn hello(&self) -> Hello {
        Hello {
            protocol: PROTOCOL_VERSION,
            scenario: self.sim.scenario().name.clone(),
            model: self.sim.model().clone(),
            params: self.sim.params().clone(),
            human_capsule_ids: self.sim.human_capsules().into_iter().map(|c| c.id).collect(),
            human_speed_limit: self.sim.scenario().human.speed_limit,
            paused: self.paused,
        }
    }

    /// Applies one command. The error string becomes the nack reason.
    pub fn apply(&mut self, cmd: &Command) -> Result<Ack, String> {
        let mut detail = None;
        match cmd {
            Command::SetHumanTarget {
                capsule_id,
                a,
                b,
                max_speed,
            } => {
                let speed = self.sim.set_human_target(capsule_id, *a, *b, *max_speed)?;
                detail = Some(serde_json::json!({ "speed": speed }));
            }
            Command::Pause => self.paused = true,
            Command::Resume => self.paused = false,
            Command::Reset => {
                self.sim.reset();
                info!("live session reset");
            }
            Command::SetParam { name, value } => {
                self.sim.set_param(name, *value).map_err(|e| e.to_string())?;
                info!("parameter {name} set to {value}");
            }
        }
        Ok(Ack {
            cmd: cmd.name().to_string(),
            t: self.sim.time(),
            detail,
        })
    }

    /// Advances one tick unless paused. A failing tick pauses the session.
    pub fn tick(&mut self) -> Option<StateFrame> {
        if self.paused {
            return None;
        }
        let tick = self.sim.ticks();
        match self.sim.step() {
            Ok(detail) => Some(StateFrame::from_tick(tick, detail)),
            Err(e) => {
                error!("tick {tick} failed, pausing: {e}");
                self.paused = true;
                None
            }
        }
    }
}
