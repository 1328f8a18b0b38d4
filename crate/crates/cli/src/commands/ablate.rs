use atd3_gait::RewardSet;
use serde::{Deserialize, Serialize};

use super::train::{cmd_train, TrainSummary};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, write_json, write_summary_csv, write_text, SummaryRow};
use crate::plot::bar_chart;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub name: String,
    /// Per condition: mean and std over trials of the best evaluation reward.
    pub rows: Vec<SummaryRow>,
    pub conditions: Vec<TrainSummary>,
}

/// The first `count` reward sets of the incremental ladder
/// `r_d, +offset, +r_s, +r_n, +r_lhs, +r_cg, +r_gs`.
pub fn ladder_prefixes(count: usize) -> Result<Vec<RewardSet>> {
    let ladder = RewardSet::ablation_ladder();
    if count == 0 || count > ladder.len() {
        return Err(CliError::Config(format!(
            "ablation needs between 1 and {} conditions, got {count}",
            ladder.len()
        )));
    }
    Ok(ladder[..count].to_vec())
}

/// One multi-trial training run per reward set, written under
/// `<out>/<name>/<condition>/`.
pub fn cmd_ablate(cfg: &RunConfig, sets: &[RewardSet]) -> Result<AblationSummary> {
    cfg.validate()?;
    let dir = cfg.run_dir();
    ensure_dir(&dir)?;
    let mut conditions = Vec::new();
    for set in sets {
        let label = set.label();
        log::info!("ablation condition {label}");
        let mut sub = cfg.clone();
        sub.out = dir.clone();
        sub.name = label.clone();
        sub.reward_set = label;
        conditions.push(cmd_train(&sub)?);
    }
    let rows: Vec<SummaryRow> = conditions.iter().map(|c| c.best.clone()).collect();
    write_summary_csv(&dir.join("summary.csv"), &rows)?;
    let summary = AblationSummary {
        name: cfg.name.clone(),
        rows,
        conditions,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    let bars: Vec<(String, f64, f64)> = summary.rows.iter().map(|r| (r.condition.clone(), r.mean, r.std)).collect();
    write_text(&dir.join("ablation.svg"), &bar_chart("highest evaluation reward", "reward", &bars))?;
    Ok(summary)
}
