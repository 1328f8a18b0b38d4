use std::path::Path;

use atd3::{stream_rng, Hyperparams, Trainer, TrainerConfig, Variant};
use atd3_env::Environment;
use atd3_eval::{
    estimate_q, estimate_true_q, evaluate_policy, mean_std, window_mean_abs_error, write_qerror_csv, FrozenPolicy,
    QErrorReport, TrueQSettings,
};
use atd3_gait::RewardSet;
use serde::{Deserialize, Serialize};

use super::train::trial_dir;
use super::with_env;
use crate::config::{EnvKind, RunConfig};
use crate::error::Result;
use crate::output::{ensure_dir, write_json, write_summary_csv, write_text, SummaryRow};
use crate::plot::{panel_grid, Series};

const ESTIMATE_STREAM: u64 = 4;
const TRUE_Q_STREAM: u64 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QErrorTrial {
    pub variant: Variant,
    pub trial: usize,
    pub seed: u64,
    /// Critic estimate every estimate interval, as `(step, Q)`.
    pub estimates: Vec<(u64, f64)>,
    pub reports: Vec<QErrorReport>,
    /// Mean |normalized error| over the summary window.
    pub window_error: Option<f64>,
    pub eval_displacement: f64,
    /// The walker ended up standing still; such trials should be re-run.
    pub standing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QErrorSummary {
    pub name: String,
    pub env: String,
    pub steps: u64,
    pub window_fraction: f64,
    /// Per variant: mean and std over trials of the window error.
    pub rows: Vec<SummaryRow>,
    pub trials: Vec<QErrorTrial>,
}

impl QErrorSummary {
    pub fn mean_error(&self, variant: Variant) -> Option<f64> {
        self.rows.iter().find(|r| r.condition == variant.name()).map(|r| r.mean)
    }
}

fn variant_hp(cfg: &RunConfig, variant: Variant) -> Hyperparams {
    let mut hp = Hyperparams::for_variant(variant);
    cfg.hp.apply(&mut hp);
    hp
}

/// Trains every configured variant on the task reward plus the offset,
/// tracking critic estimates against Monte-Carlo returns.
pub fn cmd_qerror(cfg: &RunConfig) -> Result<QErrorSummary> {
    cfg.validate()?;
    for &v in &cfg.qerror.variants {
        variant_hp(cfg, v).validate()?;
    }
    let dir = cfg.run_dir();
    ensure_dir(&dir)?;
    write_text(&dir.join("config.toml"), &cfg.to_toml()?)?;
    if cfg.steps == 0 {
        log::warn!("zero-length training: the Q-error series will be empty");
    }
    let fraction = cfg.qerror.window_fraction(cfg.steps);
    let mut trials = Vec::new();
    for &variant in &cfg.qerror.variants {
        let vdir = dir.join(variant.name());
        for (k, &seed) in cfg.seeds.iter().enumerate() {
            log::info!("{}: {variant} trial {k} (seed {seed})", cfg.name);
            let tdir = trial_dir(&vdir, k);
            ensure_dir(&tdir)?;
            let t = with_env!(cfg, |env| run_trial(cfg, env, variant, k, seed, fraction, &tdir)?);
            if t.standing {
                log::warn!("{variant} trial {k} ended standing; re-run with another seed");
            }
            trials.push(t);
        }
    }
    let rows = cfg
        .qerror
        .variants
        .iter()
        .map(|&v| {
            let errs: Vec<f64> = trials
                .iter()
                .filter(|t| t.variant == v)
                .filter_map(|t| t.window_error)
                .collect();
            SummaryRow::from_values(v.name(), &errs)
        })
        .collect();
    let summary = QErrorSummary {
        name: cfg.name.clone(),
        env: cfg.env.name().into(),
        steps: cfg.steps,
        window_fraction: fraction,
        rows,
        trials,
    };
    write_summary_csv(&dir.join("summary.csv"), &summary.rows)?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_text(&dir.join("qerror.svg"), &qerror_svg(&summary))?;
    Ok(summary)
}

fn run_trial<E: Environment + Clone>(
    cfg: &RunConfig,
    env: E,
    variant: Variant,
    trial: usize,
    seed: u64,
    fraction: f64,
    dir: &Path,
) -> Result<QErrorTrial> {
    let q = &cfg.qerror;
    let template = env.clone();
    let settings = TrueQSettings {
        samples: q.true_q_samples,
        gamma: variant_hp(cfg, variant).gamma,
        horizon: q.horizon.unwrap_or(env.episode_cap()),
        reward_offset: q.reward_offset,
    };
    let mut gait = cfg.gait.with_rewards(RewardSet::OFFSET_ONLY);
    gait.step_offset = q.reward_offset;
    let mut trainer = Trainer::new(
        env,
        TrainerConfig {
            hp: variant_hp(cfg, variant),
            gait,
            seed,
            store_snapshots: true,
        },
    )?;
    let mut est_rng = stream_rng(seed, ESTIMATE_STREAM);
    let mut true_rng = stream_rng(seed, TRUE_Q_STREAM);
    let mut estimates: Vec<(u64, f64)> = Vec::new();
    let mut reports = Vec::new();
    let mut next_est = q.estimate_interval.max(1);
    let mut next_true = q.true_q_interval.max(1);

    while trainer.global_step() < cfg.steps {
        let remaining = (cfg.steps - trainer.global_step()) as usize;
        trainer.run_episode(Some(remaining))?;
        let step = trainer.global_step();
        if step >= next_est {
            while next_est <= step {
                next_est += q.estimate_interval.max(1);
            }
            let est = estimate_q(trainer.learner(), trainer.buffer(), q.estimate_samples, &mut est_rng)?;
            estimates.push((step, est));
        }
        if step >= next_true {
            while next_true <= step {
                next_true += q.true_q_interval.max(1);
            }
            let est = match estimates.last() {
                Some(&(s, e)) if s == step => e,
                _ => {
                    let e = estimate_q(trainer.learner(), trainer.buffer(), q.estimate_samples, &mut est_rng)?;
                    estimates.push((step, e));
                    e
                }
            };
            let policy = FrozenPolicy::from_learner(trainer.learner());
            let truth = estimate_true_q(&policy, &template, trainer.buffer(), &settings, &mut true_rng)?;
            let report = QErrorReport::new(step, est, truth);
            log::info!(
                "  {variant} step {step:>7}  estimated {est:>10.3}  true {truth:>10.3}  normalized {:?}",
                report.normalized_error
            );
            reports.push(report);
        }
    }

    let policy = FrozenPolicy::from_learner(trainer.learner());
    let eval = evaluate_policy(&policy, &template, cfg.eval_episodes)?;
    let standing = cfg.env == EnvKind::Walker2d && eval.mean_displacement.abs() < q.standing_displacement;

    let mut est_csv = csv::Writer::from_writer(Vec::new());
    est_csv.write_record(["step", "estimated_q"])?;
    for (s, e) in &estimates {
        est_csv.write_record([s.to_string(), e.to_string()])?;
    }
    let bytes = est_csv.into_inner().map_err(|e| crate::error::CliError::Io(e.into_error()))?;
    write_text(&dir.join("estimates.csv"), &String::from_utf8_lossy(&bytes))?;
    let mut out = Vec::new();
    write_qerror_csv(&mut out, &reports)?;
    write_text(&dir.join("qerror.csv"), &String::from_utf8_lossy(&out))?;
    let extra = serde_json::json!({ "env": cfg.env.name(), "trial": trial, "study": "qerror" });
    trainer
        .learner()
        .to_checkpoint(seed, trainer.global_step(), extra)?
        .save(dir.join("checkpoint.json"))?;

    Ok(QErrorTrial {
        variant,
        trial,
        seed,
        estimates,
        window_error: window_mean_abs_error(&reports, cfg.steps, fraction),
        reports,
        eval_displacement: eval.mean_displacement,
        standing,
    })
}

/// Estimated Q, true Q and normalized error per variant, averaged over
/// trials at each measurement.
fn qerror_svg(summary: &QErrorSummary) -> String {
    let variants: Vec<Variant> = summary
        .rows
        .iter()
        .filter_map(|r| r.condition.parse().ok())
        .collect();
    let pick: [(&str, fn(&QErrorReport) -> Option<f64>); 3] = [
        ("estimated Q", |r| Some(r.estimated_q)),
        ("true Q", |r| Some(r.true_q)),
        ("normalized error", |r| r.normalized_error),
    ];
    let panels = pick
        .iter()
        .map(|(title, get)| {
            let series = variants
                .iter()
                .map(|&v| {
                    let trials: Vec<&QErrorTrial> = summary.trials.iter().filter(|t| t.variant == v).collect();
                    let n = trials.iter().map(|t| t.reports.len()).min().unwrap_or(0);
                    let mut pts = Vec::new();
                    let mut band = Vec::new();
                    for i in 0..n {
                        let ys: Vec<f64> = trials.iter().filter_map(|t| get(&t.reports[i])).collect();
                        if ys.is_empty() {
                            continue;
                        }
                        let (m, s) = mean_std(&ys);
                        pts.push((trials[0].reports[i].step as f64, m));
                        band.push(s);
                    }
                    let mut s = Series::line(v.name(), pts);
                    s.band = Some(band);
                    s
                })
                .collect();
            (title.to_string(), series)
        })
        .collect::<Vec<_>>();
    panel_grid(&panels, 3, "time step", "")
}
