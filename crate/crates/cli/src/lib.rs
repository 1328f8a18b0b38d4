//! Command implementations behind the `atd3` binary: training, ablations,
//! Q-value error studies, policy evaluation and gait similarity.

mod commands;
mod config;
mod error;
mod output;
pub mod plot;

pub use commands::ablate::{cmd_ablate, ladder_prefixes, AblationSummary};
pub use commands::evaluate::{cmd_evaluate, load_policy, CheckpointEvaluation};
pub use commands::qerror::{cmd_qerror, QErrorSummary, QErrorTrial};
pub use commands::similarity::{cmd_similarity, joint_angle_svg, CheckpointSimilarity, SimilarityOutput};
pub use commands::train::{
    cmd_train, learning_curve_svg, trial_dir, write_log_csv, EpisodeRecord, EvalPoint, TrainSummary, TrialResult,
    SMOOTHING_WEIGHT,
};
pub use config::{parse_reward_set, EnvKind, GaitSettings, HpOverrides, Overrides, QErrorSettings, RunConfig};
pub use error::{CliError, Result};
pub use output::{write_summary_csv, SummaryRow};
