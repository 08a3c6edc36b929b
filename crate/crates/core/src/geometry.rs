//! Capsule primitives and analytical capsule-capsule proximity queries.
//!
//! A capsule is the set of points within `radius` of its axis segment. The
//! minimum distance between two capsules is the distance between the closest
//! points of their axes minus both radii; it goes negative on penetration so
//! that a controller still gets a usable escape direction.

use std::cmp::Ordering;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

pub type Vec3 = Vector3<f64>;

/// Squared segment length below which a segment is treated as a point.
const DEGENERATE_SEGMENT_SQ: f64 = 1e-18;
/// Relative `sin^2` of the inter-axis angle below which segments are parallel.
const PARALLEL_SIN_SQ: f64 = 1e-12;
/// Axis separation below which the direction between the axes is undefined.
pub const COINCIDENT_AXIS_EPS: f64 = 1e-9;

/// Hemisphere-capped cylinder: the swept sphere of `radius` along `a`–`b`.
///
/// `a == b` is allowed and describes a sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub id: String,
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub fn new(id: impl Into<String>, a: Vec3, b: Vec3, radius: f64) -> Result<Self, GeometryError> {
        let capsule = Capsule {
            id: id.into(),
            a,
            b,
            radius,
        };
        capsule.validate()?;
        Ok(capsule)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(GeometryError::InvalidRadius {
                id: self.id.clone(),
                radius: self.radius,
            });
        }
        if !(self.a.iter().chain(self.b.iter()).all(|x| x.is_finite())) {
            return Err(GeometryError::NonFinite(self.id.clone()));
        }
        Ok(())
    }

    pub fn axis_length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    /// Point on the axis at parameter `u` in `[0, 1]`.
    pub fn axis_point(&self, u: f64) -> Vec3 {
        self.a + (self.b - self.a) * u
    }
}

/// Result of a robot/obstacle proximity query.
///
/// `s` points from the obstacle toward the robot, so a repulsion velocity
/// along `s` moves the robot away. `r1` lies on the robot capsule surface and
/// `r2` on the obstacle surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityResult {
    pub d_min: f64,
    pub r1: Vec3,
    pub r2: Vec3,
    pub s: Vec3,
    pub robot_capsule_id: String,
    pub obstacle_capsule_id: String,
    /// Index of the robot capsule in the list passed to the query.
    pub robot_index: usize,
    pub obstacle_index: usize,
    /// Relative velocity along the minimum-distance direction; negative when
    /// approaching. Filled in by [`RelativeVelocityEstimator`].
    pub v_rel: f64,
    /// Set when the axes (nearly) intersect and `s` is a fallback direction.
    pub degenerate: bool,
}

impl ProximityResult {
    pub fn closest_pair_label(&self) -> String {
        format!("{}-{}", self.robot_capsule_id, self.obstacle_capsule_id)
    }
}

/// Parameters `(u, v)` of the closest point pair between segments
/// `a0`–`a1` and `b0`–`b1`.
///
/// Total over finite input, including zero-length segments. For parallel
/// segments with a continuum of minimizers the pair with the smallest `u` is
/// returned.
pub fn segment_closest_points(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> (f64, f64) {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);

    if a <= DEGENERATE_SEGMENT_SQ && e <= DEGENERATE_SEGMENT_SQ {
        return (0.0, 0.0);
    }
    if a <= DEGENERATE_SEGMENT_SQ {
        return (0.0, clamp01(f / e));
    }
    let c = d1.dot(&r);
    if e <= DEGENERATE_SEGMENT_SQ {
        return (clamp01(-c / a), 0.0);
    }

    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > PARALLEL_SIN_SQ * a * e {
        clamp01((b * f - c * e) / denom)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = clamp01(-c / a);
    } else if t > 1.0 {
        t = 1.0;
        s = clamp01((b - c) / a);
    }
    (s, t)
}

fn clamp01(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

fn cmp_segments(a: (&Vec3, &Vec3), b: (&Vec3, &Vec3)) -> Ordering {
    a.0.iter()
        .chain(a.1.iter())
        .zip(b.0.iter().chain(b.1.iter()))
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Closest axis points between two capsules, computed in a canonical argument
/// order so that swapping the capsules yields bit-identical points.
fn closest_axis_points(c1: &Capsule, c2: &Capsule) -> (Vec3, Vec3) {
    let swapped = cmp_segments((&c1.a, &c1.b), (&c2.a, &c2.b)) == Ordering::Greater;
    let (first, second) = if swapped { (c2, c1) } else { (c1, c2) };
    let (u, v) = segment_closest_points(&first.a, &first.b, &second.a, &second.b);
    let p = first.axis_point(u);
    let q = second.axis_point(v);
    if swapped {
        (q, p)
    } else {
        (p, q)
    }
}

/// Minimum distance between a robot capsule `c1` and an obstacle capsule `c2`.
///
/// `v_rel` is left at zero. When the axes coincide (separation below
/// [`COINCIDENT_AXIS_EPS`]) `s` is taken from `fallback` or `+z` and the result
/// is flagged `degenerate`.
pub fn capsule_min_distance(c1: &Capsule, c2: &Capsule, fallback: Option<Vec3>) -> ProximityResult {
    let (a1, a2) = closest_axis_points(c1, c2);
    let delta = a1 - a2;
    let axis_distance = delta.norm();
    let (s, degenerate) = if axis_distance > COINCIDENT_AXIS_EPS {
        (delta / axis_distance, false)
    } else {
        let dir = fallback
            .filter(|f| f.norm() > COINCIDENT_AXIS_EPS)
            .map(|f| f.normalize())
            .unwrap_or_else(Vec3::z);
        (dir, true)
    };
    ProximityResult {
        d_min: axis_distance - (c1.radius + c2.radius),
        r1: a1 - s * c1.radius,
        r2: a2 + s * c2.radius,
        s,
        robot_capsule_id: c1.id.clone(),
        obstacle_capsule_id: c2.id.clone(),
        robot_index: 0,
        obstacle_index: 0,
        v_rel: 0.0,
        degenerate,
    }
}

/// The closest of all robot/human capsule pairs.
///
/// Ties go to the lowest `(robot index, human index)` pair.
pub fn min_distance_robot_human(
    robot: &[Capsule],
    human: &[Capsule],
    fallback: Option<Vec3>,
) -> Result<ProximityResult, GeometryError> {
    if robot.is_empty() {
        return Err(GeometryError::EmptyCapsuleList("robot"));
    }
    if human.is_empty() {
        return Err(GeometryError::EmptyCapsuleList("human"));
    }
    let mut best: Option<ProximityResult> = None;
    for (i, rc) in robot.iter().enumerate() {
        for (j, hc) in human.iter().enumerate() {
            let mut res = capsule_min_distance(rc, hc, fallback);
            res.robot_index = i;
            res.obstacle_index = j;
            if best.as_ref().is_none_or(|b| res.d_min < b.d_min) {
                best = Some(res);
            }
        }
    }
    Ok(best.expect("non-empty capsule lists"))
}

/// Unsmoothed finite-difference rate of change of the minimum distance.
pub fn raw_relative_velocity(d_min: f64, previous_d_min: f64, dt: f64) -> f64 {
    (d_min - previous_d_min) / dt
}

/// First-order low-passed finite difference of `d_min`.
///
/// `alpha = 1` disables smoothing; `alpha = 0` freezes the estimate. The first
/// update after construction or [`reset`](Self::reset) returns 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeVelocityEstimator {
    alpha: f64,
    previous_d_min: Option<f64>,
    v_rel: f64,
}

impl RelativeVelocityEstimator {
    pub fn new(alpha: f64) -> Self {
        RelativeVelocityEstimator {
            alpha: alpha.clamp(0.0, 1.0),
            previous_d_min: None,
            v_rel: 0.0,
        }
    }

    pub fn update(&mut self, d_min: f64, dt: f64) -> f64 {
        debug_assert!(dt > 0.0);
        if let Some(prev) = self.previous_d_min {
            let raw = raw_relative_velocity(d_min, prev, dt);
            self.v_rel = self.alpha * raw + (1.0 - self.alpha) * self.v_rel;
        }
        self.previous_d_min = Some(d_min);
        self.v_rel
    }

    pub fn value(&self) -> f64 {
        self.v_rel
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha.clamp(0.0, 1.0);
    }

    pub fn reset(&mut self) {
        self.previous_d_min = None;
        self.v_rel = 0.0;
    }
}
