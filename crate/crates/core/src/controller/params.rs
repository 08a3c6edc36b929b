use serde::{Deserialize, Serialize};

use crate::error::{Error, ParamError, Result};
use crate::kinematics::RobotModel;

/// Every tunable of the avoidance controller, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Repulsion gain (m/s).
    pub k1: f64,
    /// Approach-velocity damping gain.
    pub k2: f64,
    /// Growth of the influence zone with approach speed (s).
    pub c_v: f64,
    /// Minimum influence distance (m).
    pub d_1: f64,
    /// Critical clearance (m).
    pub d_cr: f64,
    /// Damping band: full damping below `l1`, none above `l2` (m).
    pub l1: f64,
    pub l2: f64,
    #[serde(rename = "Kp")]
    pub kp: f64,
    #[serde(rename = "Ki")]
    pub ki: f64,
    /// Damping of the least-squares joint-velocity mapping.
    pub lambda: f64,
    /// Time constant of the repulsion ramp after a controller switch (s).
    pub tau: f64,
    /// Control period (s).
    pub dt: f64,
    /// Low-pass factor of the relative-velocity estimate, 1 = unfiltered.
    pub v_rel_smoothing: f64,
    /// Upper bound of the repulsion magnitude (m/s).
    pub rep_cap: f64,
    /// Null-space gain pulling the arm back to its initial posture (1/s).
    /// Zero disables the term.
    pub posture_gain: f64,
}

/// Parameter file contents: every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub c_v: Option<f64>,
    pub d_1: Option<f64>,
    pub d_cr: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    #[serde(rename = "Kp")]
    pub kp: Option<f64>,
    #[serde(rename = "Ki")]
    pub ki: Option<f64>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub dt: Option<f64>,
    pub v_rel_smoothing: Option<f64>,
    pub rep_cap: Option<f64>,
    pub posture_gain: Option<f64>,
}

impl ParamsFile {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("controller params", e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    /// Fields set in `other` take precedence.
    pub fn merged(&self, other: &ParamsFile) -> ParamsFile {
        macro_rules! pick {
            ($($f:ident),*) => { ParamsFile { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(k1, k2, c_v, d_1, d_cr, l1, l2, kp, ki, lambda, tau, dt, v_rel_smoothing, rep_cap, posture_gain)
    }

    /// Fills unset fields with defaults; `tau` and `rep_cap` derive from the
    /// model's EEF limits.
    pub fn resolve(&self, model: &RobotModel) -> Result<ControllerParams, ParamError> {
        let d = ControllerParams::defaults_for(model);
        let params = ControllerParams {
            k1: self.k1.unwrap_or(d.k1),
            k2: self.k2.unwrap_or(d.k2),
            c_v: self.c_v.unwrap_or(d.c_v),
            d_1: self.d_1.unwrap_or(d.d_1),
            d_cr: self.d_cr.unwrap_or(d.d_cr),
            l1: self.l1.unwrap_or(d.l1),
            l2: self.l2.unwrap_or(d.l2),
            kp: self.kp.unwrap_or(d.kp),
            ki: self.ki.unwrap_or(d.ki),
            lambda: self.lambda.unwrap_or(d.lambda),
            tau: self.tau.unwrap_or(d.tau),
            dt: self.dt.unwrap_or(d.dt),
            v_rel_smoothing: self.v_rel_smoothing.unwrap_or(d.v_rel_smoothing),
            rep_cap: self.rep_cap.unwrap_or(d.rep_cap),
            posture_gain: self.posture_gain.unwrap_or(d.posture_gain),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Names accepted by [`ControllerParams::set`].
pub const PARAM_NAMES: [&str; 15] = [
    "k1",
    "k2",
    "c_v",
    "d_1",
    "d_cr",
    "l1",
    "l2",
    "Kp",
    "Ki",
    "lambda",
    "tau",
    "dt",
    "v_rel_smoothing",
    "rep_cap",
    "posture_gain",
];

impl ControllerParams {
    /// Default set with `tau = v_max / (5 a_max)` and `rep_cap = v_max`.
    pub fn defaults_for(model: &RobotModel) -> Self {
        ControllerParams {
            k1: 0.2,
            k2: 0.5,
            c_v: 0.2,
            d_1: 0.3,
            d_cr: 0.05,
            l1: 0.3,
            l2: 0.8,
            kp: 2.0,
            ki: 0.5,
            lambda: 0.05,
            tau: model.v_max / (5.0 * model.a_max),
            dt: 0.04,
            v_rel_smoothing: 0.5,
            rep_cap: model.v_max,
            posture_gain: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        fn bad(name: &str, value: f64, reason: &'static str) -> ParamError {
            ParamError::OutOfRange {
                name: name.to_string(),
                value,
                reason,
            }
        }
        for name in PARAM_NAMES {
            let value = self.get(name).expect("known name");
            if !value.is_finite() {
                return Err(bad(name, value, "must be finite"));
            }
        }
        let nonnegative = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("c_v", self.c_v),
            ("d_cr", self.d_cr),
            ("Kp", self.kp),
            ("Ki", self.ki),
            ("lambda", self.lambda),
            ("rep_cap", self.rep_cap),
            ("posture_gain", self.posture_gain),
            ("l1", self.l1),
        ];
        for (name, value) in nonnegative {
            if value < 0.0 {
                return Err(bad(name, value, "must be >= 0"));
            }
        }
        for (name, value) in [("d_1", self.d_1), ("tau", self.tau), ("dt", self.dt)] {
            if value <= 0.0 {
                return Err(bad(name, value, "must be > 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.v_rel_smoothing) {
            return Err(bad("v_rel_smoothing", self.v_rel_smoothing, "must lie in [0, 1]"));
        }
        if self.l1 >= self.l2 {
            return Err(bad("l1", self.l1, "must be below l2"));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "k1" => self.k1,
            "k2" => self.k2,
            "c_v" => self.c_v,
            "d_1" => self.d_1,
            "d_cr" => self.d_cr,
            "l1" => self.l1,
            "l2" => self.l2,
            "Kp" => self.kp,
            "Ki" => self.ki,
            "lambda" => self.lambda,
            "tau" => self.tau,
            "dt" => self.dt,
            "v_rel_smoothing" => self.v_rel_smoothing,
            "rep_cap" => self.rep_cap,
            "posture_gain" => self.posture_gain,
            _ => return None,
        })
    }

    /// Sets one parameter by name. The change is rejected, leaving `self`
    /// untouched, if the result violates any invariant.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let mut next = self.clone();
        let slot = match name {
            "k1" => &mut next.k1,
            "k2" => &mut next.k2,
            "c_v" => &mut next.c_v,
            "d_1" => &mut next.d_1,
            "d_cr" => &mut next.d_cr,
            "l1" => &mut next.l1,
            "l2" => &mut next.l2,
            "Kp" => &mut next.kp,
            "Ki" => &mut next.ki,
            "lambda" => &mut next.lambda,
            "tau" => &mut next.tau,
            "dt" => &mut next.dt,
            "v_rel_smoothing" => &mut next.v_rel_smoothing,
            "rep_cap" => &mut next.rep_cap,
            "posture_gain" => &mut next.posture_gain,
            _ => return Err(ParamError::Unknown(name.to_string())),
        };
        *slot = value;
        next.validate()?;
        *self = next;
        Ok(())
    }
}
