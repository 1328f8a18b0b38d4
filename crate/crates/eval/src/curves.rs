//! Joint-angle gait curves: extraction from contact traces, resampling,
//! normalization and cosine similarity against a reference gait.

use atd3_gait::{cosine_similarity, segment_gaits, ContactTrace, GaitRewardConfig};
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};

pub const CURVE_LEN: usize = 100;

/// Joint order used throughout: right hip, knee, ankle, then left.
pub const JOINT_NAMES: [&str; 6] = ["right_hip", "right_knee", "right_ankle", "left_hip", "left_knee", "left_ankle"];

/// Degree ranges mapped onto `[-1, 1]`; the first bound maps to -1.
pub const HIP_RANGE: (f64, f64) = (-45.0, 115.0);
pub const KNEE_RANGE: (f64, f64) = (150.0, 0.0);
pub const ANKLE_RANGE: (f64, f64) = (-45.0, 45.0);

const REFERENCE_CSV: &str = include_str!("../data/reference_gait.csv");

pub fn joint_range(joint: usize) -> (f64, f64) {
    match joint % 3 {
        0 => HIP_RANGE,
        1 => KNEE_RANGE,
        _ => ANKLE_RANGE,
    }
}

/// Linear interpolation onto `n` uniformly spaced points, endpoints kept.
pub fn resample_curve(curve: &[f64], n: usize) -> Result<Vec<f64>> {
    if curve.len() < 2 {
        return Err(EvalError::CurveTooShort(curve.len()));
    }
    Ok(atd3_gait::resample_curve(curve, n))
}

/// Six joint curves in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitCurveSet {
    pub curves: [Vec<f64>; 6],
}

impl GaitCurveSet {
    /// Maps each joint onto `[-1, 1]` with its range, then subtracts the
    /// first sample so every curve starts at 0.
    pub fn normalized(&self) -> GaitCurveSet {
        let curves = std::array::from_fn(|j| {
            let (lo, hi) = joint_range(j);
            let mapped: Vec<f64> = self.curves[j].iter().map(|&d| 2.0 * (d - lo) / (hi - lo) - 1.0).collect();
            let first = mapped.first().copied().unwrap_or(0.0);
            mapped.into_iter().map(|v| v - first).collect()
        });
        GaitCurveSet { curves }
    }
}

/// One curve set per complete gait (right heel strike to the next,
/// both strikes included), each resampled to [`CURVE_LEN`] samples.
pub fn extract_gait_curves(trace: &ContactTrace, min_cycle: usize) -> Result<Vec<GaitCurveSet>> {
    let cfg = GaitRewardConfig {
        min_cycle,
        ..Default::default()
    };
    segment_gaits(trace, &cfg)
        .iter()
        .map(|seg| {
            let mut curves: [Vec<f64>; 6] = Default::default();
            for (j, c) in curves.iter_mut().enumerate() {
                let raw: Vec<f64> = trace.joint_curve(j, seg.start, seg.end).into_iter().map(f64::to_degrees).collect();
                *c = resample_curve(&raw, CURVE_LEN)?;
            }
            Ok(GaitCurveSet { curves })
        })
        .collect()
}

/// Pointwise mean of equally long curve sets.
pub fn average_curves(sets: &[GaitCurveSet]) -> Result<GaitCurveSet> {
    let first = sets.first().ok_or(EvalError::NoCompleteGait)?;
    let n = sets.len() as f64;
    let curves = std::array::from_fn(|j| {
        (0..first.curves[j].len())
            .map(|k| sets.iter().map(|s| s.curves[j][k]).sum::<f64>() / n)
            .collect()
    });
    Ok(GaitCurveSet { curves })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub per_joint: [f64; 6],
    pub mean: f64,
}

/// Mean cosine similarity over the six joints; zero-norm curves score 0.
pub fn kinematic_similarity(robot: &GaitCurveSet, reference: &GaitCurveSet) -> SimilarityScore {
    let per_joint: [f64; 6] = std::array::from_fn(|j| cosine_similarity(&robot.curves[j], &reference.curves[j]));
    SimilarityScore {
        mean: per_joint.iter().sum::<f64>() / 6.0,
        per_joint,
    }
}

/// Parses a reference table with columns `phase, hip_deg, knee_deg,
/// ankle_deg` (one right-leg cycle, [`CURVE_LEN`] rows, last row equal to
/// the first). Left curves are the right ones half a cycle later.
pub fn parse_reference_csv(text: &str) -> Result<GaitCurveSet> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut right: [Vec<f64>; 3] = Default::default();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(EvalError::Reference(format!("expected 4 columns, got {}", rec.len())));
        }
        for (j, col) in right.iter_mut().enumerate() {
            let v: f64 = rec[j + 1]
                .trim()
                .parse()
                .map_err(|e| EvalError::Reference(format!("bad value `{}`: {e}", &rec[j + 1])))?;
            col.push(v);
        }
    }
    if right[0].len() != CURVE_LEN {
        return Err(EvalError::Reference(format!("expected {CURVE_LEN} rows, got {}", right[0].len())));
    }
    let period = CURVE_LEN - 1;
    let half = CURVE_LEN / 2;
    let left: [Vec<f64>; 3] =
        std::array::from_fn(|j| (0..CURVE_LEN).map(|k| right[j][(k + half) % period]).collect());
    let [rh, rk, ra] = right;
    let [lh, lk, la] = left;
    Ok(GaitCurveSet {
        curves: [rh, rk, ra, lh, lk, la],
    })
}

/// The bundled reference gait, in degrees.
pub fn reference_gait() -> Result<GaitCurveSet> {
    parse_reference_csv(REFERENCE_CSV)
}

/// Outcome of scoring a set of rollouts against a reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub gaits: usize,
    /// Averaged robot curves after normalization.
    pub robot: GaitCurveSet,
    pub score: SimilarityScore,
}

/// Segments every trace, resamples each gait, averages all gaits,
/// normalizes both sides and scores the result.
pub fn similarity_pipeline(traces: &[ContactTrace], reference: &GaitCurveSet, min_cycle: usize) -> Result<SimilarityReport> {
    let mut sets = Vec::new();
    for t in traces {
        sets.extend(extract_gait_curves(t, min_cycle)?);
    }
    let robot = average_curves(&sets)?.normalized();
    let score = kinematic_similarity(&robot, &reference.normalized());
    Ok(SimilarityReport {
        gaits: sets.len(),
        robot,
        score,
    })
}

/// A contact trace that walks `cycles` gaits whose joint angles (radians)
/// are exactly the reference samples. Each cycle lasts `CURVE_LEN - 1`
/// steps; the right foot strikes at the start of a cycle, the left half a
/// cycle later.
pub fn synthetic_trace(reference: &GaitCurveSet, cycles: usize) -> ContactTrace {
    let period = CURVE_LEN - 1;
    let half = CURVE_LEN / 2;
    let stance = period * 6 / 10;
    let mut trace = ContactTrace::default();
    let angles = |k: usize| -> [f64; 6] {
        std::array::from_fn(|j| {
            let idx = if j < 3 { k } else { (k + half) % period };
            reference.curves[j % 3][idx].to_radians()
        })
    };
    // lead-in step so the first right strike is a rising edge
    trace.push(false, true, angles(period - 1));
    for c in 0..=cycles {
        let steps = if c == cycles { 1 } else { period };
        for k in 0..steps {
            let right = k < stance;
            let left = (k + period - half) % period < stance;
            trace.push(right, left, angles(k));
        }
    }
    trace
}
