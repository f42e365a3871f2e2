use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use procreward_core::grpo::RatioMode;
use procreward_core::sim::RewardVariant;

#[derive(Debug, Parser)]
#[command(
    name = "procreward",
    version,
    about = "Process reasoning rewards: scoring, alignment, GRPO and simulation"
)]
pub struct Cli {
    #[command(flatten)]
    pub shared: Shared,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Shared {
    /// Decay rate of the process reward exp(-alpha * d).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub alpha: f64,

    /// Largest jump along the reference steps.
    #[arg(long, global = true, default_value_t = 2)]
    pub k_ref: usize,

    /// Largest jump along the generated steps.
    #[arg(long, global = true, default_value_t = 2)]
    pub k_target: usize,

    /// Clip range of the importance ratio.
    #[arg(long, global = true, default_value_t = 0.2)]
    pub epsilon: f64,

    /// KL coefficient.
    #[arg(long, global = true, default_value_t = 0.04)]
    pub beta: f64,

    /// `sequence` or `token_mean`.
    #[arg(long, global = true, default_value_t = RatioMode::Sequence)]
    pub ratio_mode: RatioMode,

    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one model output against a reference trace.
    Score {
        /// Raw model output, or @FILE.
        #[arg(long = "gen")]
        generated: String,
        /// Reference reasoning trace, or @FILE.
        #[arg(long = "ref")]
        reference: String,
        /// Ground-truth answer, or @FILE.
        #[arg(long)]
        answer: String,
    },
    /// Score every line of an outputs file against its sample.
    ScoreBatch {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        outputs: PathBuf,
    },
    /// Show the cost matrix and optimal alignment of two reasoning traces.
    Align {
        /// Reference reasoning trace, or @FILE.
        #[arg(long = "ref")]
        reference: String,
        /// Generated reasoning, or @FILE.
        #[arg(long = "gen")]
        generated: String,
    },
    /// Rewards, advantages and GRPO diagnostics for logged rollout groups.
    RewardGroup {
        #[arg(long)]
        rollouts: PathBuf,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Train the toy policy and write the per-iteration time series.
    Simulate {
        #[arg(long)]
        samples: PathBuf,
        /// `sdtw`, `naive_dtw` or `no_process`.
        #[arg(long, default_value_t = RewardVariant::Sdtw)]
        reward_variant: RewardVariant,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long, default_value_t = 8)]
        group_size: usize,
        #[arg(long, default_value_t = 0.5)]
        learning_rate: f64,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        /// Chance that a sampled answer is correct.
        #[arg(long, default_value_t = 0.5)]
        answer_accuracy: f64,
    },
    /// Compare the DP alignment against exhaustive enumeration on random matrices.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 5)]
    pub max_n: usize,
    #[arg(long, default_value_t = 6)]
    pub max_m: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Perturb the DP result to exercise the failure path.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}
