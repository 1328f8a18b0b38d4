use std::path::{Path, PathBuf};
use std::time::Instant;

use atd3::{EpisodeSummary, Trainer, TrainerConfig};
use atd3_env::{Environment, Termination};
use atd3_eval::{ema_smooth, evaluate_policy, mean_std, FrozenPolicy};
use atd3_gait::GaitReport;
use serde::{Deserialize, Serialize};

use super::with_env;
use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{ensure_dir, write_json, write_summary_csv, write_text, SummaryRow};
use crate::plot::{line_chart, Series};

pub const SMOOTHING_WEIGHT: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub step: u64,
    pub episodes: u64,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_steps: f64,
    pub mean_displacement: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub index: u64,
    pub steps: usize,
    pub train_reward: f64,
    pub default_reward: f64,
    pub displacement: f64,
    pub termination: Termination,
    pub double_support_cut: bool,
    pub gait_report: Option<GaitReport>,
}

impl From<EpisodeSummary> for EpisodeRecord {
    fn from(s: EpisodeSummary) -> Self {
        Self {
            index: s.index,
            steps: s.steps,
            train_reward: s.train_reward,
            default_reward: s.default_reward,
            displacement: s.displacement,
            termination: s.termination,
            double_support_cut: s.double_support_cut,
            gait_report: s.gait_report,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub steps: u64,
    pub episodes: u64,
    /// Episodes whose rewards went through gait finalization.
    pub gait_invocations: u64,
    pub best_reward: f64,
    pub final_reward: f64,
    pub final_displacement: f64,
    pub final_mean_steps: f64,
    pub evals: Vec<EvalPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub name: String,
    pub condition: String,
    pub env: String,
    pub variant: String,
    pub steps: u64,
    /// Mean and std over trials of each trial's best evaluation reward.
    pub best: SummaryRow,
    pub final_reward: SummaryRow,
    pub final_displacement: SummaryRow,
    pub trials: Vec<TrialResult>,
}

pub fn trial_dir(run_dir: &Path, trial: usize) -> PathBuf {
    run_dir.join(format!("trial{trial}"))
}

/// Trains one trial per seed and writes the run directory.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let dir = cfg.run_dir();
    ensure_dir(&dir)?;
    write_text(&dir.join("config.toml"), &cfg.to_toml()?)?;
    let mut trials = Vec::new();
    for (k, &seed) in cfg.seeds.iter().enumerate() {
        log::info!("{}: trial {k} (seed {seed})", cfg.name);
        let tdir = trial_dir(&dir, k);
        ensure_dir(&tdir)?;
        let result = with_env!(cfg, |env| run_trial(cfg, env, k, seed, &tdir)?);
        trials.push(result);
    }
    let summary = summarize(cfg, trials)?;
    write_summary_csv(&dir.join("summary.csv"), std::slice::from_ref(&summary.best))?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_text(&dir.join("learning_curve.svg"), &learning_curve_svg(&summary)?)?;
    Ok(summary)
}

fn summarize(cfg: &RunConfig, trials: Vec<TrialResult>) -> Result<TrainSummary> {
    let condition = cfg.rewards()?.label();
    let best: Vec<f64> = trials.iter().map(|t| t.best_reward).collect();
    let fin: Vec<f64> = trials.iter().map(|t| t.final_reward).collect();
    let disp: Vec<f64> = trials.iter().map(|t| t.final_displacement).collect();
    Ok(TrainSummary {
        name: cfg.name.clone(),
        best: SummaryRow::from_values(&condition, &best),
        final_reward: SummaryRow::from_values(&condition, &fin),
        final_displacement: SummaryRow::from_values(&condition, &disp),
        condition,
        env: cfg.env.name().into(),
        variant: cfg.variant.name().into(),
        steps: cfg.steps,
        trials,
    })
}

fn run_trial<E: Environment + Clone>(cfg: &RunConfig, env: E, trial: usize, seed: u64, dir: &Path) -> Result<TrialResult> {
    let started = Instant::now();
    let template = env.clone();
    let mut trainer = Trainer::new(
        env,
        TrainerConfig {
            hp: cfg.hyperparams(),
            gait: cfg.gait_config()?,
            seed,
            store_snapshots: false,
        },
    )?;
    let mut episodes: Vec<EpisodeRecord> = Vec::new();
    let mut evals: Vec<EvalPoint> = Vec::new();
    let mut next_eval = cfg.eval_interval;
    let evaluate = |trainer: &Trainer<E>| -> Result<EvalPoint> {
        let policy = FrozenPolicy::from_learner(trainer.learner());
        let report = evaluate_policy(&policy, &template, cfg.eval_episodes)?;
        let (_, std) = mean_std(&report.episode_rewards);
        let steps: Vec<f64> = report.episode_steps.iter().map(|&s| s as f64).collect();
        Ok(EvalPoint {
            step: trainer.global_step(),
            episodes: trainer.episodes(),
            mean_reward: report.mean_reward,
            std_reward: std,
            mean_steps: mean_std(&steps).0,
            mean_displacement: report.mean_displacement,
            wall_time: cfg.record_wall_time.then(|| started.elapsed().as_secs_f64()),
        })
    };
    while trainer.global_step() < cfg.steps {
        let remaining = (cfg.steps - trainer.global_step()) as usize;
        let summary = trainer.run_episode(Some(remaining))?;
        episodes.push(summary.into());
        if trainer.global_step() >= next_eval {
            while next_eval <= trainer.global_step() {
                next_eval += cfg.eval_interval;
            }
            let point = evaluate(&trainer)?;
            log::info!(
                "  step {:>7}  eval reward {:>10.3}  displacement {:>7.3}",
                point.step,
                point.mean_reward,
                point.mean_displacement
            );
            evals.push(point);
        }
    }
    if evals.last().map(|e| e.step) != Some(trainer.global_step()) {
        evals.push(evaluate(&trainer)?);
    }

    write_log_csv(&dir.join("log.csv"), &evals, cfg.record_wall_time)?;
    write_json(&dir.join("gait.json"), &episodes)?;
    let extra = serde_json::json!({ "env": cfg.env.name(), "trial": trial });
    trainer
        .learner()
        .to_checkpoint(seed, trainer.global_step(), extra)?
        .save(dir.join("checkpoint.json"))?;

    let last = evals.last().expect("at least one evaluation");
    Ok(TrialResult {
        trial,
        seed,
        steps: trainer.global_step(),
        episodes: trainer.episodes(),
        gait_invocations: trainer.gait_invocations(),
        best_reward: evals.iter().map(|e| e.mean_reward).fold(f64::NEG_INFINITY, f64::max),
        final_reward: last.mean_reward,
        final_displacement: last.mean_displacement,
        final_mean_steps: last.mean_steps,
        evals,
    })
}

pub fn write_log_csv(path: &Path, evals: &[EvalPoint], wall_time: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "step",
        "episodes",
        "eval_mean_reward",
        "eval_std_reward",
        "eval_mean_steps",
        "eval_mean_displacement",
    ];
    if wall_time {
        header.push("wall_time_s");
    }
    w.write_record(&header)?;
    for e in evals {
        let mut row = vec![
            e.step.to_string(),
            e.episodes.to_string(),
            e.mean_reward.to_string(),
            e.std_reward.to_string(),
            e.mean_steps.to_string(),
            e.mean_displacement.to_string(),
        ];
        if wall_time {
            row.push(e.wall_time.map(|t| format!("{t:.3}")).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::CliError::Io(e.into_error()))?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}

/// Smoothed evaluation reward of every trial plus the across-trial mean.
pub fn learning_curve_svg(summary: &TrainSummary) -> Result<String> {
    let mut series = Vec::new();
    let mut smoothed_all = Vec::new();
    for t in &summary.trials {
        let raw: Vec<f64> = t.evals.iter().map(|e| e.mean_reward).collect();
        let s = ema_smooth(&raw, SMOOTHING_WEIGHT)?;
        let pts: Vec<(f64, f64)> = t.evals.iter().zip(&s).map(|(e, &y)| (e.step as f64, y)).collect();
        let mut line = Series::line(format!("trial {} (seed {})", t.trial, t.seed), pts.clone());
        line.dashed = true;
        series.push(line);
        smoothed_all.push(pts);
    }
    let n = smoothed_all.iter().map(Vec::len).min().unwrap_or(0);
    if summary.trials.len() > 1 && n > 0 {
        let mut mean = Vec::new();
        let mut band = Vec::new();
        for i in 0..n {
            let ys: Vec<f64> = smoothed_all.iter().map(|p| p[i].1).collect();
            let (m, s) = mean_std(&ys);
            mean.push((smoothed_all[0][i].0, m));
            band.push(s);
        }
        let mut line = Series::line("mean", mean);
        line.band = Some(band);
        series.insert(0, line);
    }
    Ok(line_chart(
        &format!("{} {} ({})", summary.variant, summary.condition, summary.env),
        "time step",
        "evaluation reward (EMA 0.8)",
        &series,
    ))
}
