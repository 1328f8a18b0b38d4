//! Gait segmentation and gait-principle rewards.
//!
//! A complete gait runs from one right heel strike to the next. At episode
//! end each gait is scored with sub-rewards for double support, gait count,
//! left heel strike timing, leg crossover and left/right symmetry, and the
//! score is added to every step of the gait.

mod events;
mod finalize;
mod rewards;

pub use events::{detect_heel_strikes, double_support_runs, ContactTrace, DoubleSupportMonitor, GaitError};
pub use finalize::{
    finalize_episode_rewards, segment_gaits, stage_for_gait, FinalizedEpisode, GaitReport,
    GaitRewardConfig, GaitSegment, RewardSet, Stage,
};
pub use rewards::{
    cosine_similarity, resample_curve, reward_crossover, reward_double_support,
    reward_double_support_with_limit, reward_gait_number, reward_gait_symmetry,
    reward_left_heel_strike, SubRewards, DOUBLE_SUPPORT_LIMIT,
};
