use serde::{Deserialize, Serialize};

use crate::events::{detect_heel_strikes, double_support_runs, ContactTrace, GaitError};
use crate::rewards::{
    DOUBLE_SUPPORT_LIMIT,
    resample_curve, reward_crossover, reward_double_support_with_limit, reward_gait_number,
    reward_gait_symmetry, reward_left_heel_strike, SubRewards,
};

/// Which gait sub-rewards are switched on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSet {
    /// Constant per-step offset (`step_offset`).
    pub offset: bool,
    pub double_support: bool,
    pub gait_number: bool,
    pub left_heel_strike: bool,
    pub crossover: bool,
    pub symmetry: bool,
}

impl RewardSet {
    /// Task reward only.
    pub const DEFAULT_ONLY: RewardSet = RewardSet {
        offset: false,
        double_support: false,
        gait_number: false,
        left_heel_strike: false,
        crossover: false,
        symmetry: false,
    };

    /// Every term except symmetry, the best combination found in ablations.
    pub const OPTIMAL: RewardSet = RewardSet {
        offset: true,
        double_support: true,
        gait_number: true,
        left_heel_strike: true,
        crossover: true,
        symmetry: false,
    };

    pub const ALL: RewardSet = RewardSet {
        symmetry: true,
        ..Self::OPTIMAL
    };

    /// Task reward with the per-step offset only.
    pub const OFFSET_ONLY: RewardSet = RewardSet {
        offset: true,
        ..Self::DEFAULT_ONLY
    };

    pub fn any(&self) -> bool {
        self.offset
            || self.double_support
            || self.gait_number || self.left_heel_strike || self.crossover || self.symmetry
    }

    /// Terms added one at a time, in the order used for ablations.
    pub fn ablation_ladder() -> Vec<RewardSet> {
        let mut set = Self::DEFAULT_ONLY;
        let mut ladder = vec![set];
        for add in 0..6 {
            match add {
                0 => set.offset = true,
                1 => set.double_support = true,
                2 => set.gait_number = true,
                3 => set.left_heel_strike = true,
                4 => set.crossover = true,
                _ => set.symmetry = true,
            }
            ladder.push(set);
        }
        ladder
    }

    /// Short name such as `r_d+offset+r_s`.
    pub fn label(&self) -> String {
        let mut parts = vec!["r_d"];
        for (on, name) in [
            (self.offset, "offset"),
            (self.double_support, "r_s"),
            (self.gait_number, "r_n"),
            (self.left_heel_strike, "r_lhs"),
            (self.crossover, "r_cg"),
            (self.symmetry, "r_gs"),
        ] {
            if on {
                parts.push(name);
            }
        }
        parts.join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaitRewardConfig {
    pub rewards: RewardSet,
    /// Added to every step when the offset term is enabled.
    pub step_offset: f64,
    /// Shortest accepted gait, in steps.
    pub min_cycle: usize,
    /// Window for counting future gaits.
    pub lookahead: usize,
    /// Longest tolerated double-support run.
    pub double_support_limit: usize,
    /// Number of completed gaits before the stage-two terms apply.
    pub stage_two_after: usize,
    /// Resampling length for symmetry curves.
    pub curve_samples: usize,
    /// Spread each gait score over its steps instead of adding it whole to
    /// every step.
    pub amortize: bool,
}

impl Default for GaitRewardConfig {
    fn default() -> Self {
        Self {
            rewards: RewardSet::OPTIMAL,
            step_offset: -0.5,
            min_cycle: 25,
            lookahead: 500,
            double_support_limit: DOUBLE_SUPPORT_LIMIT,
            stage_two_after: 2,
            curve_samples: 100,
            amortize: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Learning to step: only the double-support term applies.
    One,
    /// Learning walking principles: every enabled term applies.
    Two,
}

pub fn stage_for_gait(index: usize, cfg: &GaitRewardConfig) -> Stage {
    if index >= cfg.stage_two_after {
        Stage::Two
    } else {
        Stage::One
    }
}

/// One complete gait, right heel strike to right heel strike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitSegment {
    pub index: usize,
    pub start: usize,
    /// Next right heel strike (exclusive end of the segment).
    pub end: usize,
    pub cycle_len: usize,
    /// Absolute step of the first left heel strike inside the gait.
    pub left_strike: Option<usize>,
    pub double_support_runs: Vec<usize>,
    pub stage: Stage,
    /// Every term evaluated, regardless of stage or reward set.
    pub sub_rewards: SubRewards,
    /// Score added to the gait's steps under the active stage and reward set.
    pub applied: f64,
}

/// Finds complete gaits and scores them.
pub fn segment_gaits(trace: &ContactTrace, cfg: &GaitRewardConfig) -> Vec<GaitSegment> {
    let right = detect_heel_strikes(&trace.right);
    let left = detect_heel_strikes(&trace.left);
    let bounds: Vec<(usize, usize)> = right
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(s, e)| e - s >= cfg.min_cycle)
        .collect();

    bounds
        .iter()
        .enumerate()
        .map(|(index, &(start, end))| {
            let cycle_len = end - start;
            let left_strike = left.iter().copied().find(|&t| t >= start && t < end);
            let runs = double_support_runs(&trace.right[start..end], &trace.left[start..end])
                .expect("trace columns have equal length");
            let longest = runs.iter().copied().max().unwrap_or(0);
            let n_future = bounds
                .iter()
                .filter(|(_, e)| *e > start && *e <= start + cfg.lookahead)
                .count();
            let symmetry = left_strike
                .and_then(|ls| left.iter().copied().find(|&t| t > ls).map(|next| (ls, next)))
                .map(|(ls, next)| {
                    let n = cfg.curve_samples;
                    let r = std::array::from_fn(|j| resample_curve(&trace.joint_curve(j, start, end), n));
                    let l = std::array::from_fn(|j| resample_curve(&trace.joint_curve(3 + j, ls, next), n));
                    reward_gait_symmetry(&r, &l)
                })
                .unwrap_or(0.0);
            let sub = SubRewards {
                double_support: reward_double_support_with_limit(longest, cfg.double_support_limit).0,
                gait_number: reward_gait_number(n_future),
                left_heel_strike: reward_left_heel_strike(left_strike.map(|t| t - start), cycle_len),
                crossover: reward_crossover(&trace.angles[start], left_strike.map(|t| &trace.angles[t])),
                symmetry,
            };
            let stage = stage_for_gait(index, cfg);
            let set = cfg.rewards;
            let mut applied = if set.double_support { sub.double_support } else { 0.0 };
            if stage == Stage::Two {
                for (on, v) in [
                    (set.gait_number, sub.gait_number),
                    (set.left_heel_strike, sub.left_heel_strike),
                    (set.crossover, sub.crossover),
                    (set.symmetry, sub.symmetry),
                ] {
                    if on {
                        applied += v;
                    }
                }
            }
            GaitSegment {
                index,
                start,
                end,
                cycle_len,
                left_strike,
                double_support_runs: runs,
                stage,
                sub_rewards: sub,
                applied,
            }
        })
        .collect()
}

/// Per-episode summary written next to training logs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GaitReport {
    pub episode_len: usize,
    pub segments: Vec<GaitSegment>,
    /// First step of the first stage-two gait.
    pub stage_two_from: Option<usize>,
    /// Step at which the double-support run first exceeded the limit.
    pub double_support_violation: Option<usize>,
    /// Total added on top of the offset task reward.
    pub gait_bonus: f64,
}

impl GaitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinalizedEpisode {
    pub rewards: Vec<f64>,
    pub report: GaitReport,
}

/// Turns per-step task rewards into training rewards.
///
/// Every step gets `r_d` plus the offset if enabled, each gait adds its
/// score to all of its steps, and if the double-support run exceeded
/// its limit the step where that happened receives the -2 penalty (that is
/// also where the episode was cut). In evaluation mode, or with no gait term
/// enabled, the task reward is returned unchanged.
pub fn finalize_episode_rewards(
    trace: &ContactTrace,
    default_rewards: &[f64],
    cfg: &GaitRewardConfig,
    evaluation: bool,
) -> Result<FinalizedEpisode, GaitError> {
    for len in [trace.left.len(), trace.angles.len(), default_rewards.len()] {
        if len != trace.right.len() {
            return Err(GaitError::LengthMismatch(trace.right.len(), len));
        }
    }
    let segments = segment_gaits(trace, cfg);
    let violation = if cfg.rewards.double_support {
        let mut run = 0;
        trace.right.iter().zip(&trace.left).position(|(&r, &l)| {
            run = if r && l { run + 1 } else { 0 };
            reward_double_support_with_limit(run, cfg.double_support_limit).1
        })
    } else {
        None
    };
    let mut report = GaitReport {
        episode_len: trace.len(),
        stage_two_from: segments.iter().find(|s| s.stage == Stage::Two).map(|s| s.start),
        double_support_violation: violation,
        segments,
        gait_bonus: 0.0,
    };
    if evaluation || !cfg.rewards.any() {
        return Ok(FinalizedEpisode {
            rewards: default_rewards.to_vec(),
            report,
        });
    }

    let offset = if cfg.rewards.offset { cfg.step_offset } else { 0.0 };
    let mut rewards: Vec<f64> = default_rewards.iter().map(|r| r + offset).collect();
    let mut bonus = 0.0;
    for seg in &report.segments {
        let per_step = if cfg.amortize {
            seg.applied / seg.cycle_len as f64
        } else {
            seg.applied
        };
        for r in &mut rewards[seg.start..seg.end] {
            *r += per_step;
        }
        bonus += per_step * seg.cycle_len as f64;
    }
    if let Some(t) = violation {
        let penalty = reward_double_support_with_limit(cfg.double_support_limit + 1, cfg.double_support_limit).0;
        rewards[t] += penalty;
        bonus += penalty;
    }
    report.gait_bonus = bonus;
    Ok(FinalizedEpisode { rewards, report })
}
