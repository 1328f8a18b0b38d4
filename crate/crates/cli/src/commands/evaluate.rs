use std::path::{Path, PathBuf};

use atd3::load_actor;
use atd3_env::Environment;
use atd3_eval::{evaluate_policy, mean_std, FrozenPolicy};
use atd3_nn::Checkpoint;
use serde::{Deserialize, Serialize};

use super::with_env;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, write_json, write_text};

/// Reads a learner checkpoint and keeps its live actor.
pub fn load_policy(path: &Path, obs_dim: usize) -> Result<FrozenPolicy> {
    let ck = Checkpoint::load(path)?;
    let (actor, hp) = load_actor(&ck, obs_dim)?;
    Ok(FrozenPolicy {
        actor,
        seq_len: hp.seq_len,
        obs_dim,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEvaluation {
    pub checkpoint: String,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_steps: f64,
    pub mean_displacement: f64,
    pub episode_rewards: Vec<f64>,
}

/// Noise-free evaluation of saved policies on the configured task.
pub fn cmd_evaluate(cfg: &RunConfig, checkpoints: &[PathBuf]) -> Result<Vec<CheckpointEvaluation>> {
    if checkpoints.is_empty() {
        return Err(CliError::Config("at least one checkpoint is required".into()));
    }
    let dir = cfg.run_dir();
    ensure_dir(&dir)?;
    let mut results = Vec::new();
    for path in checkpoints {
        let r = with_env!(cfg, |env| evaluate_one(cfg, &env, path)?);
        log::info!("{}: reward {:.3}, displacement {:.3}", r.checkpoint, r.mean_reward, r.mean_displacement);
        results.push(r);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["checkpoint", "mean_reward", "std_reward", "mean_steps", "mean_displacement"])?;
    for r in &results {
        w.write_record([
            r.checkpoint.clone(),
            r.mean_reward.to_string(),
            r.std_reward.to_string(),
            r.mean_steps.to_string(),
            r.mean_displacement.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_text(&dir.join("evaluation.csv"), &String::from_utf8_lossy(&bytes))?;
    write_json(&dir.join("evaluation.json"), &results)?;
    Ok(results)
}

fn evaluate_one<E: Environment + Clone>(cfg: &RunConfig, env: &E, path: &Path) -> Result<CheckpointEvaluation> {
    let policy = load_policy(path, env.obs_dim())?;
    let report = evaluate_policy(&policy, env, cfg.eval_episodes)?;
    let steps: Vec<f64> = report.episode_steps.iter().map(|&s| s as f64).collect();
    Ok(CheckpointEvaluation {
        checkpoint: path.display().to_string(),
        mean_reward: report.mean_reward,
        std_reward: mean_std(&report.episode_rewards).1,
        mean_steps: mean_std(&steps).0,
        mean_displacement: report.mean_displacement,
        episode_rewards: report.episode_rewards,
    })
}
