//! Wire protocol: JSON text messages `{type, seq, payload}`.

use serde::{Deserialize, Serialize};

use crate::controller::ControllerParams;
use crate::geometry::{Capsule, Vec3};
use crate::kinematics::{JointVector, RobotModel};
use crate::sim::TickDetail;
use crate::task::TaskMode;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Hello,
    Frame,
    Command,
    Ack,
    Nack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: MessageKind,
    pub seq: u64,
    pub payload: serde_json::Value,
}

impl Envelope {
    pub fn new<T: Serialize>(kind: MessageKind, seq: u64, payload: &T) -> Self {
        Envelope {
            kind,
            seq,
            payload: serde_json::to_value(payload).expect("protocol payloads serialize"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("protocol envelopes serialize")
    }
}

/// Sent once to every client on connect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub protocol: u32,
    pub scenario: String,
    pub model: RobotModel,
    pub params: ControllerParams,
    pub human_capsule_ids: Vec<String>,
    pub human_speed_limit: f64,
    pub paused: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub tick: u64,
    pub t: f64,
    pub robot_capsules: Vec<Capsule>,
    pub human_capsules: Vec<Capsule>,
    pub q: JointVector,
    pub qdot_cmd: JointVector,
    pub p_e: Vec3,
    pub p_g: Vec3,
    pub d_min: f64,
    pub v_rel: f64,
    pub r1: Vec3,
    pub r2: Vec3,
    pub closest_pair: String,
    pub v_rep_mod: f64,
    pub gamma: f64,
    pub beta: f64,
    pub mode: TaskMode,
}

impl StateFrame {
    pub fn from_tick(tick: u64, detail: &TickDetail) -> Self {
        let r = &detail.record;
        StateFrame {
            tick,
            t: r.t,
            robot_capsules: detail.robot_capsules.clone(),
            human_capsules: detail.human_capsules.clone(),
            q: r.q,
            qdot_cmd: r.qdot_cmd,
            p_e: r.p_e,
            p_g: r.p_g,
            d_min: r.d_min,
            v_rel: r.v_rel,
            r1: detail.proximity.r1,
            r2: detail.proximity.r2,
            closest_pair: r.closest_pair.clone(),
            v_rep_mod: r.v_rep_mod,
            gamma: r.gamma,
            beta: r.beta,
            mode: r.mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    SetHumanTarget {
        capsule_id: String,
        a: Vec3,
        b: Vec3,
        max_speed: f64,
    },
    Pause,
    Resume,
    Reset,
    SetParam {
        name: String,
        value: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SetHumanTarget { .. } => "set_human_target",
            Command::Pause => "pause",
            Command::Resume => "resume",
            Command::Reset => "reset",
            Command::SetParam { .. } => "set_param",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub cmd: String,
    /// Simulated time of the tick boundary where the command took effect.
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nack {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmd: Option<String>,
    pub reason: String,
}

/// Parses a client message. On failure returns the sequence number (if one
/// could be read) and a reason for the nack.
pub fn parse_command(text: &str) -> Result<(u64, Command), (u64, String)> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| {
        let seq = serde_json::from_str::<serde_json::Value>(text)
            .ok()
            .and_then(|v| v.get("seq").and_then(|s| s.as_u64()))
            .unwrap_or(0);
        (seq, format!("malformed message: {e}"))
    })?;
    if env.kind != MessageKind::Command {
        return Err((env.seq, format!("clients may only send commands, got {:?}", env.kind)));
    }
    let cmd = serde_json::from_value(env.payload).map_err(|e| (env.seq, format!("invalid command: {e}")))?;
    Ok((env.seq, cmd))
}
