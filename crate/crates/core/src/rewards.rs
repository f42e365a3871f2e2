//! Format, accuracy and process rewards, and their unweighted total.

use serde::{Deserialize, Serialize};

use crate::alignment::{naive_dtw, subsequence_dtw, AlignmentConfig};
use crate::dataset::TrainingSample;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::segmentation::{segment, RawTrace};
use crate::similarity::build_cost_matrix;

/// Tag layout every model output must follow: one think block, then one
/// answer block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatSpec {
    pub think_open: String,
    pub think_close: String,
    pub answer_open: String,
    pub answer_close: String,
    /// Permit whitespace before the first tag and after the last one.
    pub allow_outer_whitespace: bool,
    /// Permit whitespace between the think and answer blocks.
    pub allow_inner_whitespace: bool,
}

impl Default for FormatSpec {
    fn default() -> Self {
        Self {
            think_open: "<think>".into(),
            think_close: "</think>".into(),
            answer_open: "<answer>".into(),
            answer_close: "</answer>".into(),
            allow_outer_whitespace: true,
            allow_inner_whitespace: true,
        }
    }
}

impl FormatSpec {
    pub fn validate(&self) -> Result<()> {
        let tags = self.tags();
        if tags.iter().any(|t| t.is_empty()) {
            return Err(Error::InvalidConfig("format tags must be non-empty".into()));
        }
        for (i, a) in tags.iter().enumerate() {
            if tags[i + 1..].contains(a) {
                return Err(Error::InvalidConfig(format!(
                    "format tag `{a}` is used twice"
                )));
            }
        }
        Ok(())
    }

    fn tags(&self) -> [&str; 4] {
        [
            &self.think_open,
            &self.think_close,
            &self.answer_open,
            &self.answer_close,
        ]
    }

    /// Wraps reasoning and answer in this layout.
    pub fn render(&self, think: &str, answer: &str) -> String {
        format!(
            "{}{}{}{}{}{}",
            self.think_open, think, self.think_close, self.answer_open, answer, self.answer_close
        )
    }
}

/// A model output split into its reasoning and answer parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedOutput {
    pub well_formed: bool,
    pub think_text: String,
    pub answer_text: String,
    pub raw: String,
}

pub fn parse_output(raw: &str, spec: &FormatSpec) -> ParsedOutput {
    match split_blocks(raw, spec) {
        Some((think, answer)) => ParsedOutput {
            well_formed: true,
            think_text: think.to_string(),
            answer_text: answer.to_string(),
            raw: raw.to_string(),
        },
        None => ParsedOutput {
            well_formed: false,
            think_text: String::new(),
            answer_text: String::new(),
            raw: raw.to_string(),
        },
    }
}

fn split_blocks<'a>(raw: &'a str, spec: &FormatSpec) -> Option<(&'a str, &'a str)> {
    let has_tag = |s: &str| spec.tags().iter().any(|t| s.contains(t));
    let body = if spec.allow_outer_whitespace {
        raw.trim()
    } else {
        raw
    };

    let rest = body.strip_prefix(spec.think_open.as_str())?;
    let (think, rest) = rest.split_once(spec.think_close.as_str())?;
    if has_tag(think) {
        return None;
    }
    let rest = if spec.allow_inner_whitespace {
        rest.trim_start()
    } else {
        rest
    };
    let rest = rest.strip_prefix(spec.answer_open.as_str())?;
    let (answer, tail) = rest.split_once(spec.answer_close.as_str())?;
    if has_tag(answer) || !tail.is_empty() {
        return None;
    }
    Some((think, answer))
}

pub fn format_reward<T: Scalar>(raw: &str, spec: &FormatSpec) -> T {
    indicator(parse_output(raw, spec).well_formed)
}

/// Trimmed, case-folded answer with one trailing period removed.
pub fn canonicalize_answer(answer: &str) -> String {
    let folded = answer.trim().to_lowercase();
    folded
        .strip_suffix('.')
        .map(|s| s.trim_end().to_string())
        .unwrap_or(folded)
}

pub fn accuracy_reward<T: Scalar>(model_answer: &str, ground_truth: &str) -> Result<T> {
    let gt = canonicalize_answer(ground_truth);
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(indicator(canonicalize_answer(model_answer) == gt))
}

fn indicator<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

/// `exp(-alpha * distance)`.
pub fn distance_to_reward<T: Scalar>(distance: T, alpha: T) -> T {
    (-alpha * distance).exp()
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be a positive finite number (got {alpha})"
        )));
    }
    Ok(())
}

/// Process reward and the alignment distance it came from. `distance` is
/// `None` when the generated reasoning has no steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessReward<T> {
    pub reward: T,
    pub distance: Option<T>,
}

/// How reasoning is aligned to the reference when scoring the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessAlignment {
    Subsequence(AlignmentConfig),
    /// Classic end-to-end DTW; every extra generated step adds cost.
    Naive,
}

pub fn process_reward<T: Scalar>(
    generated_think: &str,
    reference_trace: &str,
    alpha: T,
    cfg: AlignmentConfig,
) -> Result<ProcessReward<T>> {
    process_reward_with(
        generated_think,
        reference_trace,
        alpha,
        ProcessAlignment::Subsequence(cfg),
    )
}

pub fn process_reward_with<T: Scalar>(
    generated_think: &str,
    reference_trace: &str,
    alpha: T,
    method: ProcessAlignment,
) -> Result<ProcessReward<T>> {
    check_alpha(alpha)?;
    if let ProcessAlignment::Subsequence(cfg) = method {
        cfg.validate()?;
    }
    let reference = segment(&RawTrace::reference(reference_trace)?);
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let generated = segment(&RawTrace::generated(generated_think));
    if generated.is_empty() {
        return Ok(ProcessReward {
            reward: T::zero(),
            distance: None,
        });
    }
    let costs = build_cost_matrix::<T>(&reference, &generated)?;
    let distance = match method {
        ProcessAlignment::Subsequence(cfg) => subsequence_dtw(&costs, cfg)?.distance,
        ProcessAlignment::Naive => naive_dtw(&costs)?,
    };
    Ok(ProcessReward {
        reward: distance_to_reward(distance, alpha),
        distance: Some(distance),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardConfig<T> {
    pub alpha: T,
    pub alignment: AlignmentConfig,
    pub format: FormatSpec,
}

impl<T: Scalar> Default for RewardConfig<T> {
    fn default() -> Self {
        Self {
            alpha: T::one(),
            alignment: AlignmentConfig::default(),
            format: FormatSpec::default(),
        }
    }
}

impl<T: Scalar> RewardConfig<T> {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        self.alignment.validate()?;
        self.format.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardBreakdown<T> {
    pub r_proc: T,
    pub r_acc: T,
    pub r_fmt: T,
    pub total: T,
    pub sdtw_distance: Option<T>,
}

impl<T: Scalar> RewardBreakdown<T> {
    fn new(r_proc: T, r_acc: T, r_fmt: T, sdtw_distance: Option<T>) -> Self {
        Self {
            r_proc,
            r_acc,
            r_fmt,
            total: r_proc + r_acc + r_fmt,
            sdtw_distance,
        }
    }
}

/// Scores one model output against a training sample.
///
/// Accuracy and process rewards are only granted to well-formed outputs; a
/// malformed output scores zero on all three parts.
pub fn total_reward<T: Scalar>(
    raw_output: &str,
    sample: &TrainingSample,
    cfg: &RewardConfig<T>,
) -> Result<RewardBreakdown<T>> {
    total_reward_with(
        raw_output,
        sample,
        cfg,
        ProcessAlignment::Subsequence(cfg.alignment),
    )
}

pub fn total_reward_with<T: Scalar>(
    raw_output: &str,
    sample: &TrainingSample,
    cfg: &RewardConfig<T>,
    method: ProcessAlignment,
) -> Result<RewardBreakdown<T>> {
    cfg.validate()?;
    sample.validate()?;
    let parsed = parse_output(raw_output, &cfg.format);
    if !parsed.well_formed {
        return Ok(RewardBreakdown::new(T::zero(), T::zero(), T::zero(), None));
    }
    let r_acc = accuracy_reward(&parsed.answer_text, &sample.answer_gt)?;
    let proc = process_reward_with(
        &parsed.think_text,
        &sample.reference_trace,
        cfg.alpha,
        method,
    )?;
    Ok(RewardBreakdown::new(
        proc.reward,
        r_acc,
        T::one(),
        proc.distance,
    ))
}
