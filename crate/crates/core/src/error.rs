use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("capsule {id}: radius must be positive and finite, got {radius}")]
    InvalidRadius { id: String, radius: f64 },
    #[error("capsule {0}: non-finite endpoint")]
    NonFinite(String),
    #[error("empty {0} capsule list")]
    EmptyCapsuleList(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected {expected} joints, got {got}")]
    JointCount { expected: usize, got: usize },
    #[error("joint {0}: axis must be a non-zero vector")]
    ZeroAxis(usize),
    #[error("joint {joint}: q_min ({min}) must be below q_max ({max})")]
    JointRange { joint: usize, min: f64, max: f64 },
    #[error("joint {joint}: qdot_max must be positive, got {value}")]
    VelocityLimit { joint: usize, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("link index {0} out of range 1..=7")]
    LinkIndex(usize),
    #[error("model needs at least one capsule binding")]
    NoCapsules,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    Unknown(String),
    #[error("parameter `{name}` = {value}: {reason}")]
    OutOfRange {
        name: String,
        value: f64,
        reason: &'static str,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("damped least squares: J J^T is singular and lambda = 0")]
    Singular,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid task plan: {0}")]
    Task(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("trace output: {0}")]
    Output(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Short machine-readable category used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } => "schema",
            Error::Scenario(_) => "scenario",
            Error::Task(_) => "task",
            Error::Model(_) => "model",
            Error::Param(_) => "params",
            Error::Geometry(_) => "geometry",
            Error::Control(_) => "control",
            Error::Output(_) => "output",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
