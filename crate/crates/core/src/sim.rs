//! Desk-scale GRPO simulation with a softmax-over-variants policy.
//!
//! Each training sample gets a fixed pool of candidate reasoning traces derived
//! from its reference (full copy, truncations, token-dropout paraphrases, step
//! shuffles, filler-padded copies and a one-line answer-only rationale). The
//! policy holds one logit per pool entry. Every iteration samples a group per
//! training sample, scores it with the selected reward, and takes one exact
//! gradient step of the GRPO loss on the logits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignmentConfig;
use crate::dataset::TrainingSample;
use crate::error::{Error, Result};
use crate::grpo::{grpo_loss_gradient, CandidateRollout, GroupRollout, GrpoConfig};
use crate::numfmt::sig12;
use crate::rewards::{
    total_reward_with, FormatSpec, ProcessAlignment, RewardBreakdown, RewardConfig,
};
use crate::segmentation::segment_text;

/// Filler sentences appended by padded variants.
pub fn filler_sentences() -> Vec<&'static str> {
    include_str!("../data/filler_sentences.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Full,
    /// First `k` reference steps.
    Truncated(usize),
    /// Word dropout at `rate_percent` / 100.
    Dropout {
        rate_percent: u32,
    },
    Shuffled,
    /// Full copy followed by this many filler sentences.
    Padded(usize),
    TrivialShort,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariantKind::Full => write!(f, "full"),
            VariantKind::Truncated(k) => write!(f, "truncated_{k}"),
            VariantKind::Dropout { rate_percent } => write!(f, "dropout_{rate_percent}"),
            VariantKind::Shuffled => write!(f, "shuffled"),
            VariantKind::Padded(k) => write!(f, "padded_{k}"),
            VariantKind::TrivialShort => write!(f, "trivial_short"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceVariant {
    pub text: String,
    /// Number of steps the segmenter finds in `text`.
    pub step_count: usize,
    pub kind: VariantKind,
}

impl TraceVariant {
    fn new(text: String, kind: VariantKind) -> Self {
        let step_count = segment_text(&text).len();
        Self {
            text,
            step_count,
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracePool {
    pub sample_id: String,
    pub variants: Vec<TraceVariant>,
}

impl TracePool {
    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }
}

/// Which variants a pool contains besides the full copy, truncations and the
/// trivial rationale.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolConfig {
    pub dropout_rates: Vec<f64>,
    pub shuffles: usize,
    pub paddings: Vec<usize>,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            dropout_rates: vec![0.1, 0.3],
            shuffles: 2,
            paddings: vec![1, 2, 3],
        }
    }
}

pub fn build_pool(sample: &TrainingSample, seed: u64) -> Result<TracePool> {
    build_pool_with(sample, seed, &PoolConfig::default())
}

pub fn build_pool_with(sample: &TrainingSample, seed: u64, cfg: &PoolConfig) -> Result<TracePool> {
    let steps = segment_text(&sample.reference_trace);
    if steps.is_empty() {
        return Err(Error::EmptyReference);
    }
    let n = steps.len();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, fnv1a(sample.id.as_bytes())));
    let mut variants = vec![TraceVariant::new(steps.join(" "), VariantKind::Full)];

    for k in 1..n {
        variants.push(TraceVariant::new(
            steps[..k].join(" "),
            VariantKind::Truncated(k),
        ));
    }

    for &rate in &cfg.dropout_rates {
        let text = steps
            .iter()
            .map(|s| drop_words(s, rate, &mut rng))
            .collect::<Vec<_>>()
            .join(" ");
        let rate_percent = (rate * 100.0).round() as u32;
        variants.push(TraceVariant::new(
            text,
            VariantKind::Dropout { rate_percent },
        ));
    }

    if n >= 2 {
        let mut seen = vec![steps.clone()];
        for _ in 0..cfg.shuffles {
            let mut order = steps.clone();
            for _ in 0..16 {
                order.shuffle(&mut rng);
                if !seen.contains(&order) {
                    break;
                }
            }
            if seen.contains(&order) {
                continue;
            }
            seen.push(order.clone());
            variants.push(TraceVariant::new(order.join(" "), VariantKind::Shuffled));
        }
    }

    let fillers = filler_sentences();
    for &count in &cfg.paddings {
        let count = count.min(fillers.len());
        let picks = index::sample(&mut rng, fillers.len(), count);
        let mut parts = steps.clone();
        parts.extend(picks.iter().map(|i| fillers[i].to_string()));
        variants.push(TraceVariant::new(
            parts.join(" "),
            VariantKind::Padded(count),
        ));
    }

    variants.push(TraceVariant::new(
        format!(
            "Based on the video content, the correct answer is {}.",
            sample.answer_gt.trim()
        ),
        VariantKind::TrivialShort,
    ));

    Ok(TracePool {
        sample_id: sample.id.clone(),
        variants,
    })
}

/// Removes `round(rate * words)` words from `step`, never the last word so the
/// step keeps its terminal punctuation.
pub fn drop_words(step: &str, rate: f64, rng: &mut impl Rng) -> String {
    let words: Vec<&str> = step.split_whitespace().collect();
    if words.len() < 2 {
        return words.join(" ");
    }
    let droppable = words.len() - 1;
    let count = ((rate * words.len() as f64).round() as usize).min(droppable);
    let dropped = index::sample(rng, droppable, count).into_vec();
    words
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .map(|(_, w)| *w)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Softmax policy with one logit per pool variant, per training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyPolicy {
    pub logits: Vec<Vec<f64>>,
    pub temperature: f64,
}

impl ToyPolicy {
    pub fn uniform(sizes: &[usize], temperature: f64) -> Self {
        Self {
            logits: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            temperature,
        }
    }

    pub fn log_probs(&self, sample: usize) -> Vec<f64> {
        log_softmax(&self.logits[sample], self.temperature)
    }

    pub fn probs(&self, sample: usize) -> Vec<f64> {
        self.log_probs(sample).into_iter().map(f64::exp).collect()
    }

    /// Chains `d loss / d log pi(action)` through the softmax:
    /// `d log pi(a) / d logit_u = (1[u = a] - pi_u) / temperature`.
    pub fn logit_gradient(
        &self,
        sample: usize,
        actions: &[usize],
        dloss_dlogp: &[f64],
    ) -> Vec<f64> {
        let p = self.probs(sample);
        let mut grad = vec![0.0; p.len()];
        for (&a, &d) in actions.iter().zip(dloss_dlogp) {
            for (u, g) in grad.iter_mut().enumerate() {
                let indicator = if u == a { 1.0 } else { 0.0 };
                *g += d * (indicator - p[u]) / self.temperature;
            }
        }
        grad
    }
}

pub fn log_softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let scaled: Vec<f64> = logits.iter().map(|l| l / temperature).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scaled.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    scaled.iter().map(|s| s - lse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardVariant {
    /// Accuracy + format + subsequence-DTW process reward.
    Sdtw,
    /// Accuracy + format + classic DTW process reward.
    NaiveDtw,
    /// Accuracy + format only.
    NoProcess,
}

impl RewardVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RewardVariant::Sdtw => "sdtw",
            RewardVariant::NaiveDtw => "naive_dtw",
            RewardVariant::NoProcess => "no_process",
        }
    }
}

impl fmt::Display for RewardVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RewardVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdtw" => Ok(RewardVariant::Sdtw),
            "naive_dtw" => Ok(RewardVariant::NaiveDtw),
            "no_process" => Ok(RewardVariant::NoProcess),
            other => Err(Error::InvalidConfig(format!(
                "unknown reward variant `{other}` (expected sdtw, naive_dtw or no_process)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub group_size: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub reward_variant: RewardVariant,
    pub alpha: f64,
    pub alignment: AlignmentConfig,
    pub grpo: GrpoConfig<f64>,
    pub temperature: f64,
    /// Probability that a sampled answer is correct, independent of the reasoning.
    pub answer_accuracy: f64,
    pub pool: PoolConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            group_size: 8,
            iterations: 200,
            learning_rate: 0.5,
            seed: 7,
            reward_variant: RewardVariant::Sdtw,
            alpha: 1.0,
            alignment: AlignmentConfig::default(),
            grpo: GrpoConfig::default(),
            temperature: 1.0,
            answer_accuracy: 0.5,
            pool: PoolConfig::default(),
        }
    }
}

impl SimConfig {
    /// `iterations == 0` is accepted and yields an empty report.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.group_size < 2 {
            return bad(format!("group size must be >= 2 (got {})", self.group_size));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning rate must be >= 0 (got {})",
                self.learning_rate
            ));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad(format!(
                "temperature must be positive (got {})",
                self.temperature
            ));
        }
        if !(0.0..=1.0).contains(&self.answer_accuracy) {
            return bad(format!(
                "answer accuracy must lie in [0, 1] (got {})",
                self.answer_accuracy
            ));
        }
        if self
            .pool
            .dropout_rates
            .iter()
            .any(|r| !(0.0..1.0).contains(r))
        {
            return bad("dropout rates must lie in [0, 1)".into());
        }
        self.alignment.validate()?;
        self.grpo.validate()?;
        RewardConfig {
            alpha: self.alpha,
            alignment: self.alignment,
            format: FormatSpec::default(),
        }
        .validate()
    }
}

/// Per-iteration averages over every sampled candidate of every sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mean_steps: f64,
    pub mean_chars: f64,
    /// Step count expected under the policy that produced this iteration's samples.
    pub expected_steps: f64,
    pub mean_r_proc: f64,
    pub mean_r_acc: f64,
    pub mean_total: f64,
    pub clip_fraction: f64,
    pub kl: f64,
    pub loss: f64,
}

impl IterationRecord {
    pub const COLUMNS: [&'static str; 10] = [
        "iteration",
        "mean_steps",
        "mean_chars",
        "expected_steps",
        "mean_r_proc",
        "mean_r_acc",
        "mean_total",
        "clip_fraction",
        "kl",
        "loss",
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub records: Vec<IterationRecord>,
    /// Highest-probability variant of each sample under the final policy.
    pub final_modal: Vec<(String, VariantKind)>,
    pub final_policy: ToyPolicy,
}

impl SimReport {
    /// Comma-separated time series: one header row, then one row per iteration.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", IterationRecord::COLUMNS.join(","))?;
        for r in &self.records {
            let values = [
                r.mean_steps,
                r.mean_chars,
                r.expected_steps,
                r.mean_r_proc,
                r.mean_r_acc,
                r.mean_total,
                r.clip_fraction,
                r.kl,
                r.loss,
            ];
            let cells: Vec<String> = values.iter().map(|&v| sig12(v)).collect();
            writeln!(out, "{},{}", r.iteration, cells.join(","))?;
        }
        Ok(())
    }

    pub fn mean_steps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mean_steps).collect()
    }
}

pub fn run_simulation(cfg: &SimConfig, samples: &[TrainingSample]) -> Result<SimReport> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidConfig(
            "simulation needs at least one training sample".into(),
        ));
    }
    for s in samples {
        s.validate()?;
    }
    let pools = samples
        .iter()
        .map(|s| build_pool_with(s, cfg.seed, &cfg.pool))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = pools.iter().map(TracePool::len).collect();
    let mut policy = ToyPolicy::uniform(&sizes, cfg.temperature);
    let reference_logp: Vec<Vec<f64>> = (0..pools.len()).map(|s| policy.log_probs(s)).collect();

    let reward_cfg = RewardConfig {
        alpha: cfg.alpha,
        alignment: cfg.alignment,
        format: FormatSpec::default(),
    };
    let method = match cfg.reward_variant {
        RewardVariant::NaiveDtw => ProcessAlignment::Naive,
        _ => ProcessAlignment::Subsequence(cfg.alignment),
    };
    // Rewards depend only on (variant, answer correct), so score each pair once.
    let mut cache: Vec<Vec<[Option<RewardBreakdown<f64>>; 2]>> =
        sizes.iter().map(|&n| vec![[None, None]; n]).collect();

    let mut records = Vec::with_capacity(cfg.iterations);
    for iteration in 0..cfg.iterations {
        let mut acc = Accumulator::default();
        for (si, (sample, pool)) in samples.iter().zip(&pools).enumerate() {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix(mix(cfg.seed, si as u64), iteration as u64));
            let old_logp = policy.log_probs(si);
            let probs: Vec<f64> = old_logp.iter().map(|l| l.exp()).collect();
            let sampler = WeightedIndex::new(&probs).expect("softmax weights are positive");

            let mut actions = Vec::with_capacity(cfg.group_size);
            let mut candidates = Vec::with_capacity(cfg.group_size);
            for _ in 0..cfg.group_size {
                let v = sampler.sample(&mut rng);
                let correct = rng.gen_bool(cfg.answer_accuracy);
                let slot = &mut cache[si][v][usize::from(correct)];
                let breakdown = match slot {
                    Some(b) => *b,
                    None => {
                        let answer = if correct {
                            sample.answer_gt.clone()
                        } else {
                            wrong_answer(&sample.answer_gt)
                        };
                        let raw = reward_cfg.format.render(&pool.variants[v].text, &answer);
                        let b = total_reward_with(&raw, sample, &reward_cfg, method)?;
                        *slot = Some(b);
                        b
                    }
                };
                let (r_proc, reward) = match cfg.reward_variant {
                    RewardVariant::NoProcess => (0.0, breakdown.r_acc + breakdown.r_fmt),
                    _ => (breakdown.r_proc, breakdown.total),
                };
                let variant = &pool.variants[v];
                acc.steps += variant.step_count as f64;
                acc.chars += variant.text.chars().count() as f64;
                acc.r_proc += r_proc;
                acc.r_acc += breakdown.r_acc;
                acc.total += reward;
                acc.candidates += 1;

                actions.push(v);
                candidates.push(CandidateRollout::new(
                    variant.text.clone(),
                    vec![old_logp[v]],
                    vec![old_logp[v]],
                    vec![reference_logp[si][v]],
                    reward,
                )?);
            }

            acc.expected_steps += pool
                .variants
                .iter()
                .zip(&probs)
                .map(|(v, p)| p * v.step_count as f64)
                .sum::<f64>();

            let group = GroupRollout::new(candidates)?;
            let (out, grads) = grpo_loss_gradient(&group, &cfg.grpo)?;
            acc.clip += out.diagnostics.clip_fraction;
            acc.kl += out.diagnostics.mean_kl;
            acc.loss += out.loss;

            let dloss: Vec<f64> = grads.iter().map(|g| g[0]).collect();
            let grad = policy.logit_gradient(si, &actions, &dloss);
            for (l, g) in policy.logits[si].iter_mut().zip(grad) {
                *l -= cfg.learning_rate * g;
            }
        }
        records.push(acc.finish(iteration, samples.len()));
    }

    let final_modal = pools
        .iter()
        .enumerate()
        .map(|(si, pool)| {
            let p = policy.probs(si);
            let best = (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
            (pool.sample_id.clone(), pool.variants[best].kind)
        })
        .collect();

    Ok(SimReport {
        records,
        final_modal,
        final_policy: policy,
    })
}

#[derive(Default)]
struct Accumulator {
    steps: f64,
    chars: f64,
    expected_steps: f64,
    r_proc: f64,
    r_acc: f64,
    total: f64,
    clip: f64,
    kl: f64,
    loss: f64,
    candidates: usize,
}

impl Accumulator {
    fn finish(self, iteration: usize, groups: usize) -> IterationRecord {
        let c = self.candidates as f64;
        let g = groups as f64;
        IterationRecord {
            iteration,
            mean_steps: self.steps / c,
            mean_chars: self.chars / c,
            expected_steps: self.expected_steps / g,
            mean_r_proc: self.r_proc / c,
            mean_r_acc: self.r_acc / c,
            mean_total: self.total / c,
            clip_fraction: self.clip / g,
            kl: self.kl / g,
            loss: self.loss / g,
        }
    }
}

fn wrong_answer(gt: &str) -> String {
    let gt = gt.trim();
    let mut chars = gt.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_alphabetic() => {
            let base = if c.is_ascii_uppercase() { b'A' } else { b'a' };
            let next = (c as u8 - base + 1) % 4 + base;
            let next = if next == c as u8 { base + 1 } else { next };
            (next as char).to_string()
        }
        _ => format!("not {gt}"),
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

// splitmix64 finalizer over the pair.
fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(a << 6)
        .wrapping_add(a >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewards::canonicalize_answer;

    fn sample(id: &str, reference: &str) -> TrainingSample {
        TrainingSample {
            id: id.into(),
            video_ref: format!("{id}.mp4"),
            question: "What happens next?".into(),
            answer_gt: "B".into(),
            reference_trace: reference.into(),
        }
    }

    const FOUR: &str =
        "A man walks to the car. He opens the door. He sits down inside. He starts the engine.";

    #[test]
    fn pool_contains_truncations_and_required_variants() {
        let pool = build_pool(&sample("s", FOUR), 3).unwrap();
        let truncs: Vec<usize> = pool
            .variants
            .iter()
            .filter_map(|v| match v.kind {
                VariantKind::Truncated(k) => Some(v.step_count.min(k)),
                _ => None,
            })
            .collect();
        assert_eq!(truncs, [1, 2, 3]);
        assert_eq!(pool.variants[0].kind, VariantKind::Full);
        assert_eq!(pool.variants[0].text, FOUR);
        assert!(pool
            .variants
            .iter()
            .any(|v| v.kind == VariantKind::TrivialShort && v.step_count == 1));
        for v in &pool.variants {
            assert_eq!(v.step_count, segment_text(&v.text).len());
        }
        let padded: Vec<usize> = pool
            .variants
            .iter()
            .filter(|v| matches!(v.kind, VariantKind::Padded(_)))
            .map(|v| v.step_count)
            .collect();
        assert_eq!(padded, [5, 6, 7]);
        assert_eq!(
            pool.variants
                .iter()
                .filter(|v| v.kind == VariantKind::Shuffled)
                .count(),
            2
        );
    }

    #[test]
    fn pool_is_deterministic() {
        let s = sample("s", FOUR);
        assert_eq!(build_pool(&s, 9).unwrap(), build_pool(&s, 9).unwrap());
        assert_ne!(build_pool(&s, 9).unwrap(), build_pool(&s, 10).unwrap());
    }

    #[test]
    fn pool_rejects_empty_reference() {
        assert!(matches!(
            build_pool(&sample("s", " "), 1),
            Err(Error::EmptyReference)
        ));
    }

    #[test]
    fn single_step_reference_has_no_truncations_or_shuffles() {
        let pool = build_pool(&sample("s", "The ball rolls away."), 1).unwrap();
        assert!(!pool
            .variants
            .iter()
            .any(|v| matches!(v.kind, VariantKind::Truncated(_) | VariantKind::Shuffled)));
    }

    #[test]
    fn dropout_removes_rounded_share_at_seeded_positions() {
        let step: String = (0..20)
            .map(|i| format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" ")
            + ".";
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let out = drop_words(&step, 0.1, &mut rng);
        let kept: Vec<&str> = out.split_whitespace().collect();
        assert_eq!(kept.len(), 18);
        assert_eq!(*kept.last().unwrap(), "w19.");

        // Replaying the same stream picks the same positions.
        let mut replay = ChaCha8Rng::seed_from_u64(42);
        let expected: Vec<usize> = index::sample(&mut replay, 19, 2).into_vec();
        let words: Vec<String> = step.split_whitespace().map(str::to_string).collect();
        let rebuilt: Vec<&str> = words
            .iter()
            .enumerate()
            .filter(|(i, _)| !expected.contains(i))
            .map(|(_, w)| w.as_str())
            .collect();
        assert_eq!(kept, rebuilt);
    }

    #[test]
    fn wrong_answers_never_match() {
        for gt in ["A", "B", "C", "D", "a", "d", "yes", "42"] {
            assert_ne!(
                canonicalize_answer(&wrong_answer(gt)),
                canonicalize_answer(gt),
                "{gt}"
            );
        }
    }

    #[test]
    fn policy_gradient_matches_finite_differences() {
        let policy = ToyPolicy {
            logits: vec![vec![0.3, -0.2, 0.9, 0.0]],
            temperature: 0.7,
        };
        let actions = [2, 0, 2];
        let weights = [0.5, -1.0, 0.25];
        let f = |p: &ToyPolicy| -> f64 {
            let lp = p.log_probs(0);
            actions.iter().zip(weights).map(|(&a, w)| w * lp[a]).sum()
        };
        let g = policy.logit_gradient(0, &actions, &weights);
        for u in 0..4 {
            let mut hi = policy.clone();
            let mut lo = policy.clone();
            hi.logits[0][u] += 1e-6;
            lo.logits[0][u] -= 1e-6;
            let fd = (f(&hi) - f(&lo)) / 2e-6;
            assert!((fd - g[u]).abs() < 1e-8, "{u}: {fd} vs {}", g[u]);
        }
    }

    fn small_set() -> Vec<TrainingSample> {
        vec![
            sample("a", FOUR),
            sample(
                "b",
                "The dog sees a ball. It runs toward the ball. It catches the ball.",
            ),
        ]
    }

    #[test]
    fn zero_learning_rate_keeps_policy_flat() {
        let cfg = SimConfig {
            learning_rate: 0.0,
            iterations: 5,
            ..SimConfig::default()
        };
        let report = run_simulation(&cfg, &small_set()).unwrap();
        let first = report.records[0].expected_steps;
        for r in &report.records {
            assert_eq!(r.expected_steps, first);
            assert_eq!(r.kl, 0.0);
        }
    }

    #[test]
    fn zero_iterations_gives_empty_report() {
        let cfg = SimConfig {
            iterations: 0,
            ..SimConfig::default()
        };
        let report = run_simulation(&cfg, &small_set()).unwrap();
        assert!(report.records.is_empty());
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn simulation_is_reproducible() {
        let cfg = SimConfig {
            iterations: 20,
            ..SimConfig::default()
        };
        let a = run_simulation(&cfg, &small_set()).unwrap();
        let b = run_simulation(&cfg, &small_set()).unwrap();
        assert_eq!(a, b);
        let other = run_simulation(&SimConfig { seed: 8, ..cfg }, &small_set()).unwrap();
        assert_ne!(a.records, other.records);
    }

    #[test]
    fn config_validation() {
        let bad = [
            SimConfig {
                group_size: 1,
                ..SimConfig::default()
            },
            SimConfig {
                learning_rate: -1.0,
                ..SimConfig::default()
            },
            SimConfig {
                alpha: 0.0,
                ..SimConfig::default()
            },
            SimConfig {
                answer_accuracy: 1.5,
                ..SimConfig::default()
            },
        ];
        for cfg in bad {
            assert!(run_simulation(&cfg, &small_set()).is_err());
        }
        assert!(run_simulation(&SimConfig::default(), &[]).is_err());
        assert_eq!(
            "naive_dtw".parse::<RewardVariant>().unwrap(),
            RewardVariant::NaiveDtw
        );
        assert!("dtw".parse::<RewardVariant>().is_err());
    }
}
