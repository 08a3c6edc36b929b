//! Per-tick trace records, trace writers and run metrics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::kinematics::JointVector;
use crate::task::TaskMode;

/// Allowed dip below the critical distance before a run counts as unsafe (m).
pub const PENETRATION_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub q: JointVector,
    pub qdot_cmd: JointVector,
    pub p_e: Vec3,
    pub p_g: Vec3,
    pub d_min: f64,
    pub v_rel: f64,
    pub v_rep_mod: f64,
    pub gamma: f64,
    pub beta: f64,
    pub mode: TaskMode,
    pub closest_pair: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Csv,
    Jsonl,
}

impl TraceFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            TraceFormat::Csv => "trace.csv",
            TraceFormat::Jsonl => "trace.jsonl",
        }
    }
}

impl std::str::FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "jsonl" => Ok(TraceFormat::Jsonl),
            other => Err(format!("unknown trace format `{other}` (expected csv or jsonl)")),
        }
    }
}

pub fn csv_header() -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=7).map(|i| format!("q{i}")));
    cols.extend((1..=7).map(|i| format!("qdot_cmd{i}")));
    for v in ["p_e", "p_g"] {
        cols.extend(["x", "y", "z"].iter().map(|c| format!("{v}_{c}")));
    }
    cols.extend(
        ["d_min", "v_rel", "v_rep_mod", "gamma", "beta", "mode", "closest_pair"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols
}

fn csv_row(r: &TraceRecord) -> Vec<String> {
    let mut row = Vec::with_capacity(32);
    row.push(r.t.to_string());
    row.extend(r.q.iter().map(f64::to_string));
    row.extend(r.qdot_cmd.iter().map(f64::to_string));
    row.extend(r.p_e.iter().map(f64::to_string));
    row.extend(r.p_g.iter().map(f64::to_string));
    for x in [r.d_min, r.v_rel, r.v_rep_mod, r.gamma, r.beta] {
        row.push(x.to_string());
    }
    row.push(r.mode.to_string());
    row.push(r.closest_pair.clone());
    row
}

fn output_err(e: impl std::fmt::Display) -> Error {
    Error::Output(e.to_string())
}

pub fn write_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header()).map_err(output_err)?;
    for r in records {
        w.write_record(csv_row(r)).map_err(output_err)?;
    }
    w.flush().map_err(output_err)
}

pub fn write_jsonl<W: Write>(records: &[TraceRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(output_err)?;
        out.write_all(b"\n").map_err(output_err)?;
    }
    out.flush().map_err(output_err)
}

pub fn write_trace<W: Write>(records: &[TraceRecord], format: TraceFormat, out: W) -> Result<()> {
    match format {
        TraceFormat::Csv => write_csv(records, out),
        TraceFormat::Jsonl => write_jsonl(records, out),
    }
}

/// Finite-difference EEF velocities between consecutive records.
pub fn eef_velocities(records: &[TraceRecord], dt: f64) -> Vec<Vec3> {
    records.windows(2).map(|w| (w[1].p_e - w[0].p_e) / dt).collect()
}

/// Magnitudes of the second finite difference of the EEF position.
pub fn eef_accelerations(records: &[TraceRecord], dt: f64) -> Vec<f64> {
    eef_velocities(records, dt)
        .windows(2)
        .map(|w| ((w[1] - w[0]) / dt).norm())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTiming {
    /// 1-based segment number.
    pub segment: usize,
    pub start_t: f64,
    /// Time the next segment started or the task completed.
    pub end_t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Clearance more than the tolerance below the critical distance.
    CriticalDistance,
    /// Capsules touching or overlapping.
    Contact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
    pub d_min: f64,
    pub closest_pair: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario: String,
    pub seed: u64,
    pub dt: f64,
    pub ticks: usize,
    pub min_d_min: f64,
    pub min_d_min_t: f64,
    pub min_d_min_pair: String,
    pub max_eef_accel: f64,
    pub max_eef_accel_t: f64,
    pub completion_time: Option<f64>,
    pub final_error: f64,
    pub segment_timings: Vec<SegmentTiming>,
    pub violations: Vec<Violation>,
}

impl Metrics {
    pub fn safety_violated(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Collects metrics tick by tick.
#[derive(Debug, Clone)]
pub struct MetricsBuilder {
    d_cr: f64,
    dt: f64,
    min: Option<(f64, f64, String)>,
    completion_time: Option<f64>,
    segments: Vec<SegmentTiming>,
    violations: Vec<Violation>,
    final_error: f64,
    ticks: usize,
}

impl MetricsBuilder {
    pub fn new(d_cr: f64, dt: f64) -> Self {
        MetricsBuilder {
            d_cr,
            dt,
            min: None,
            completion_time: None,
            segments: Vec::new(),
            violations: Vec::new(),
            final_error: 0.0,
            ticks: 0,
        }
    }

    /// `segment_index` is the 0-based task segment active on this tick, `None`
    /// for a plan without segments.
    pub fn observe(&mut self, r: &TraceRecord, segment_index: Option<usize>) {
        self.ticks += 1;
        self.final_error = (r.p_e - r.p_g).norm();
        if self.min.as_ref().is_none_or(|(d, _, _)| r.d_min < *d) {
            self.min = Some((r.d_min, r.t, r.closest_pair.clone()));
        }
        let kind = if r.d_min <= 0.0 {
            Some(ViolationKind::Contact)
        } else if r.d_min < self.d_cr - PENETRATION_TOLERANCE {
            Some(ViolationKind::CriticalDistance)
        } else {
            None
        };
        if let Some(kind) = kind {
            self.violations.push(Violation {
                t: r.t,
                kind,
                d_min: r.d_min,
                closest_pair: r.closest_pair.clone(),
            });
        }
        if r.mode == TaskMode::Complete {
            if self.completion_time.is_none() {
                self.completion_time = Some(r.t);
                if let Some(last) = self.segments.last_mut() {
                    last.end_t.get_or_insert(r.t);
                }
            }
            return;
        }
        let Some(segment) = segment_index.map(|i| i + 1) else { return };
        if self.segments.last().map(|s| s.segment) != Some(segment) {
            if let Some(last) = self.segments.last_mut() {
                last.end_t = Some(r.t);
            }
            self.segments.push(SegmentTiming {
                segment,
                start_t: r.t,
                end_t: None,
            });
        }
    }

    pub fn finish(self, records: &[TraceRecord], scenario: &str, seed: u64) -> Metrics {
        let (max_eef_accel, max_eef_accel_t) = eef_accelerations(records, self.dt)
            .into_iter()
            .enumerate()
            .fold((0.0, 0.0), |best, (k, a)| if a > best.0 { (a, records[k + 1].t) } else { best });
        let (min_d_min, min_d_min_t, min_d_min_pair) = self.min.unwrap_or((f64::INFINITY, 0.0, String::new()));
        Metrics {
            scenario: scenario.to_string(),
            seed,
            dt: self.dt,
            ticks: self.ticks,
            min_d_min,
            min_d_min_t,
            min_d_min_pair,
            max_eef_accel,
            max_eef_accel_t,
            completion_time: self.completion_time,
            final_error: self.final_error,
            segment_timings: self.segments,
            violations: self.violations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, x: f64, d_min: f64) -> TraceRecord {
        TraceRecord {
            t,
            q: JointVector::zeros(),
            qdot_cmd: JointVector::zeros(),
            p_e: Vec3::new(x, 0.0, 0.0),
            p_g: Vec3::new(x, 0.0, 0.0),
            d_min,
            v_rel: 0.0,
            v_rep_mod: 0.0,
            gamma: 0.0,
            beta: 1.0,
            mode: TaskMode::CaTrack,
            closest_pair: "R3-H2".into(),
        }
    }

    #[test]
    fn header_matches_row_width() {
        let header = csv_header();
        assert_eq!(header.len(), 28);
        assert_eq!(header[0], "t");
        assert_eq!(header[8], "qdot_cmd1");
        assert_eq!(header[27], "closest_pair");
        assert_eq!(csv_row(&record(0.0, 0.0, 1.0)).len(), header.len());
    }

    #[test]
    fn csv_and_jsonl() {
        let recs = vec![record(0.0, 0.0, 1.0), record(0.04, 0.01, 0.9)];
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("0.04,"));
        let mut buf = Vec::new();
        write_jsonl(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: TraceRecord = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(back, recs[1]);
    }

    #[test]
    fn accelerations_from_positions() {
        let dt = 0.1;
        let recs: Vec<_> = [0.0, 0.0, 0.01, 0.03]
            .iter()
            .enumerate()
            .map(|(k, x)| record(k as f64 * dt, *x, 1.0))
            .collect();
        let acc = eef_accelerations(&recs, dt);
        assert_eq!(acc.len(), 2);
        assert!((acc[0] - 1.0).abs() < 1e-12);
        assert!((acc[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violations_and_minimum() {
        let mut m = MetricsBuilder::new(0.05, 0.04);
        let recs = vec![record(0.0, 0.0, 0.3), record(0.04, 0.0, 0.045), record(0.08, 0.0, 0.03)];
        for r in &recs {
            m.observe(r, Some(0));
        }
        let metrics = m.finish(&recs, "x", 7);
        assert_eq!(metrics.min_d_min, 0.03);
        assert_eq!(metrics.min_d_min_t, 0.08);
        assert_eq!(metrics.violations.len(), 1);
        assert_eq!(metrics.violations[0].kind, ViolationKind::CriticalDistance);
        assert_eq!(metrics.segment_timings.len(), 1);
        assert!(metrics.safety_violated());
    }
}
