//! Human obstacle motion: scripted keyframes or live, rate-limited targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Capsule, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapsuleTemplate {
    pub id: String,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    pub a: Vec3,
    pub b: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    /// One entry per capsule template, in template order.
    pub capsules: Vec<Endpoints>,
}

/// Piecewise-linear capsule endpoint trajectory, clamped outside the keyframe
/// span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanTrajectory {
    pub capsules: Vec<CapsuleTemplate>,
    pub keyframes: Vec<Keyframe>,
}

impl HumanTrajectory {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Scenario(msg));
        if self.capsules.is_empty() {
            return bad("human needs at least one capsule".into());
        }
        for c in &self.capsules {
            if !(c.radius > 0.0 && c.radius.is_finite()) {
                return bad(format!("human capsule {}: radius must be positive", c.id));
            }
        }
        if self.keyframes.is_empty() {
            return bad("human trajectory needs at least one keyframe".into());
        }
        for (i, kf) in self.keyframes.iter().enumerate() {
            if kf.capsules.len() != self.capsules.len() {
                return bad(format!(
                    "keyframe {} has {} capsules, expected {}",
                    i,
                    kf.capsules.len(),
                    self.capsules.len()
                ));
            }
            if !kf.t.is_finite() {
                return bad(format!("keyframe {} has a non-finite time", i));
            }
            if i > 0 && kf.t <= self.keyframes[i - 1].t {
                return bad(format!("keyframe times must be strictly increasing (keyframe {})", i));
            }
        }
        Ok(())
    }

    fn build(&self, endpoints: impl Iterator<Item = Endpoints>) -> Vec<Capsule> {
        self.capsules
            .iter()
            .zip(endpoints)
            .map(|(tpl, ep)| Capsule {
                id: tpl.id.clone(),
                a: ep.a,
                b: ep.b,
                radius: tpl.radius,
            })
            .collect()
    }

    /// Capsule poses at time `t`.
    pub fn pose_at(&self, t: f64) -> Vec<Capsule> {
        let kfs = &self.keyframes;
        let first = &kfs[0];
        let last = &kfs[kfs.len() - 1];
        if t <= first.t {
            return self.build(first.capsules.iter().copied());
        }
        if t >= last.t {
            return self.build(last.capsules.iter().copied());
        }
        let k = kfs.partition_point(|kf| kf.t <= t);
        let (k0, k1) = (&kfs[k - 1], &kfs[k]);
        if t == k0.t {
            return self.build(k0.capsules.iter().copied());
        }
        let w = (t - k0.t) / (k1.t - k0.t);
        self.build(k0.capsules.iter().zip(&k1.capsules).map(|(p, q)| Endpoints {
            a: p.a + (q.a - p.a) * w,
            b: p.b + (q.b - p.b) * w,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Target {
    endpoints: Endpoints,
    speed: f64,
}

/// Human driven by operator commands: each capsule endpoint moves toward its
/// commanded target at no more than the commanded speed, itself clamped to
/// `speed_limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiveHuman {
    capsules: Vec<Capsule>,
    targets: Vec<Option<Target>>,
    speed_limit: f64,
}

impl LiveHuman {
    pub fn new(initial: Vec<Capsule>, speed_limit: f64) -> Self {
        let n = initial.len();
        LiveHuman {
            capsules: initial,
            targets: vec![None; n],
            speed_limit,
        }
    }

    pub fn capsules(&self) -> &[Capsule] {
        &self.capsules
    }

    pub fn speed_limit(&self) -> f64 {
        self.speed_limit
    }

    /// Sets a motion target for capsule `id`. Returns the effective speed.
    pub fn set_target(&mut self, id: &str, a: Vec3, b: Vec3, max_speed: f64) -> Result<f64, String> {
        let idx = self
            .capsules
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| format!("unknown human capsule `{id}`"))?;
        if !(max_speed > 0.0) || !max_speed.is_finite() {
            return Err(format!("max_speed must be positive, got {max_speed}"));
        }
        if !a.iter().chain(b.iter()).all(|x| x.is_finite()) {
            return Err("target endpoints must be finite".into());
        }
        let speed = max_speed.min(self.speed_limit);
        self.targets[idx] = Some(Target {
            endpoints: Endpoints { a, b },
            speed,
        });
        Ok(speed)
    }

    /// Moves every capsule toward its target by at most `speed * dt` per
    /// endpoint.
    pub fn advance(&mut self, dt: f64) {
        for (capsule, target) in self.capsules.iter_mut().zip(self.targets.iter_mut()) {
            let Some(tgt) = *target else { continue };
            let step = tgt.speed * dt;
            capsule.a = move_toward(capsule.a, tgt.endpoints.a, step);
            capsule.b = move_toward(capsule.b, tgt.endpoints.b, step);
            if capsule.a == tgt.endpoints.a && capsule.b == tgt.endpoints.b {
                *target = None;
            }
        }
    }
}

fn move_toward(from: Vec3, to: Vec3, max_step: f64) -> Vec3 {
    let delta = to - from;
    let dist = delta.norm();
    if dist <= max_step {
        to
    } else {
        from + delta * (max_step / dist)
    }
}
