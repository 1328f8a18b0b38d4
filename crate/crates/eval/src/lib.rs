//! Evaluation protocols: noise-free policy evaluation, estimated versus
//! Monte-Carlo Q-values, gait-curve similarity to a reference gait, and
//! learning-curve smoothing.

mod curves;
mod error;
mod policy;
mod qvalue;
mod smoothing;

pub use curves::{
    average_curves, extract_gait_curves, joint_range, kinematic_similarity, parse_reference_csv, reference_gait,
    resample_curve, similarity_pipeline, synthetic_trace, GaitCurveSet, SimilarityReport, SimilarityScore, ANKLE_RANGE,
    CURVE_LEN, HIP_RANGE, JOINT_NAMES, KNEE_RANGE,
};
pub use error::{EvalError, Result};
pub use policy::{evaluate_policy, evaluate_with_traces, run_batched, EvalReport, FrozenPolicy, Rollout, EVAL_SEED_BASE};
pub use qvalue::{
    estimate_q, estimate_true_q, window_mean_abs_error, write_qerror_csv, QErrorReport, TrueQSettings,
};
pub use smoothing::{ema_smooth, mean_std};
