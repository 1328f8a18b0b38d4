use std::path::{Path, PathBuf};

use atd3_env::{Walker, OBS_DIM};
use atd3_eval::{
    evaluate_with_traces, parse_reference_csv, reference_gait, similarity_pipeline, EvalError, GaitCurveSet,
    SimilarityReport, JOINT_NAMES,
};
use atd3_gait::ContactTrace;
use serde::{Deserialize, Serialize};

use super::evaluate::load_policy;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, write_json, write_text};
use crate::plot::{panel_grid, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSimilarity {
    pub checkpoint: String,
    pub gaits: usize,
    /// Absent when the policy never completed a gait.
    pub report: Option<SimilarityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityOutput {
    pub reference: String,
    pub episodes_per_checkpoint: usize,
    pub checkpoints: Vec<CheckpointSimilarity>,
    /// All gaits of all checkpoints averaged together.
    pub pooled: Option<SimilarityReport>,
}

fn score(traces: &[ContactTrace], reference: &GaitCurveSet, min_cycle: usize) -> Result<Option<SimilarityReport>> {
    match similarity_pipeline(traces, reference, min_cycle) {
        Ok(r) => Ok(Some(r)),
        Err(EvalError::NoCompleteGait) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Rolls out each checkpoint on the walker, extracts gaits and scores the
/// averaged joint curves against the reference gait.
pub fn cmd_similarity(
    cfg: &RunConfig,
    checkpoints: &[PathBuf],
    reference: Option<&Path>,
    episodes: usize,
) -> Result<SimilarityOutput> {
    if checkpoints.is_empty() {
        return Err(CliError::Config("at least one checkpoint is required".into()));
    }
    let (ref_name, ref_curves) = match reference {
        Some(p) => (p.display().to_string(), parse_reference_csv(&std::fs::read_to_string(p)?)?),
        None => ("bundled".to_string(), reference_gait()?),
    };
    let env = Walker::new(cfg.walker.clone())?;
    let min_cycle = cfg.gait.min_cycle;
    let mut per = Vec::new();
    let mut all_traces = Vec::new();
    for path in checkpoints {
        let policy = load_policy(path, OBS_DIM)?;
        let (_, traces) = evaluate_with_traces(&policy, &env, episodes, true)?;
        let report = score(&traces, &ref_curves, min_cycle)?;
        let name = path.display().to_string();
        match &report {
            Some(r) => log::info!("{name}: {} gaits, similarity {:.4}", r.gaits, r.score.mean),
            None => log::warn!("{name}: no complete gait, similarity undefined"),
        }
        per.push(CheckpointSimilarity {
            checkpoint: name,
            gaits: report.as_ref().map_or(0, |r| r.gaits),
            note: report.is_none().then(|| "no complete gait".to_string()),
            report,
        });
        all_traces.extend(traces);
    }
    let out = SimilarityOutput {
        reference: ref_name,
        episodes_per_checkpoint: episodes,
        checkpoints: per,
        pooled: score(&all_traces, &ref_curves, min_cycle)?,
    };
    let dir = cfg.run_dir();
    ensure_dir(&dir)?;
    write_json(&dir.join("similarity.json"), &out)?;
    write_similarity_csv(&dir.join("similarity.csv"), &out)?;
    write_text(&dir.join("joint_angles.svg"), &joint_angle_svg(&ref_curves, out.pooled.as_ref()))?;
    Ok(out)
}

fn write_similarity_csv(path: &Path, out: &SimilarityOutput) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["checkpoint", "gaits"];
    header.extend(JOINT_NAMES);
    header.push("mean");
    w.write_record(&header)?;
    let rows = out
        .checkpoints
        .iter()
        .map(|c| (c.checkpoint.as_str(), c.gaits, c.report.as_ref()))
        .chain(std::iter::once((
            "pooled",
            out.pooled.as_ref().map_or(0, |r| r.gaits),
            out.pooled.as_ref(),
        )));
    for (name, gaits, report) in rows {
        let mut row = vec![name.to_string(), gaits.to_string()];
        match report {
            Some(r) => {
                row.extend(r.score.per_joint.iter().map(|v| v.to_string()));
                row.push(r.score.mean.to_string());
            }
            None => row.extend(std::iter::repeat_n(String::new(), 7)),
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}

/// Normalized reference and robot curves, one panel per joint.
pub fn joint_angle_svg(reference: &GaitCurveSet, robot: Option<&SimilarityReport>) -> String {
    let reference = reference.normalized();
    let pct = |c: &[f64]| -> Vec<(f64, f64)> {
        let n = (c.len().max(2) - 1) as f64;
        c.iter().enumerate().map(|(i, &v)| (100.0 * i as f64 / n, v)).collect()
    };
    let panels: Vec<(String, Vec<Series>)> = (0..6)
        .map(|j| {
            let mut human = Series::line("reference", pct(&reference.curves[j]));
            human.dashed = true;
            let mut series = vec![human];
            if let Some(r) = robot {
                series.push(Series::line(format!("robot ({:.3})", r.score.per_joint[j]), pct(&r.robot.curves[j])));
            }
            (JOINT_NAMES[j].replace('_', " "), series)
        })
        .collect();
    panel_grid(&panels, 3, "gait cycle (%)", "normalized angle")
}
