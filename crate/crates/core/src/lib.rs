//! Process reasoning rewards for video-reasoning RL.
//!
//! Reasoning traces are split into steps, compared step-by-step with ROUGE,
//! aligned against a reference with subsequence DTW, and turned into rewards
//! that feed a GRPO objective. A small simulation harness trains a toy policy
//! against those rewards.

pub mod alignment;
pub mod dataset;
pub mod error;
pub mod grpo;
pub mod numfmt;
pub mod rewards;
pub mod scalar;
pub mod segmentation;
pub mod sim;
pub mod similarity;

pub use alignment::{
    brute_force_sdtw, naive_dtw, subsequence_dtw, AlignmentConfig, AlignmentResult,
};
pub use dataset::{load_rollouts, load_samples, RolloutCandidate, RolloutRecord, TrainingSample};
pub use error::{Error, Result};
pub use grpo::{
    grpo_loss_gradient, grpo_objective, importance_ratio, kl_penalty, standardize_advantages,
    CandidateRollout, GroupRollout, GrpoConfig, GrpoOutput, RatioMode,
};
pub use rewards::{
    accuracy_reward, format_reward, process_reward, total_reward, FormatSpec, ProcessReward,
    RewardBreakdown, RewardConfig,
};
pub use scalar::Scalar;
pub use segmentation::{segment, tokenize, Origin, RawTrace, StepSequence, TokenList};
pub use sim::{run_simulation, RewardVariant, SimConfig, SimReport};
pub use similarity::{build_cost_matrix, rouge_avg, rouge_l, rouge_n, step_distance, CostMatrix};

pub type CostMatrixF64 = CostMatrix<f64>;
pub type AlignmentResultF64 = AlignmentResult<f64>;
pub type RewardConfigF64 = RewardConfig<f64>;
pub type RewardBreakdownF64 = RewardBreakdown<f64>;
pub type ProcessRewardF64 = ProcessReward<f64>;
pub type GrpoConfigF64 = GrpoConfig<f64>;
pub type CandidateRolloutF64 = CandidateRollout<f64>;
pub type GroupRolloutF64 = GroupRollout<f64>;
pub type GrpoOutputF64 = GrpoOutput<f64>;
