//! Group-relative advantages and the clipped, KL-regularized GRPO objective.
//!
//! For a group of `G` candidates with standardized advantages `A_i` the
//! objective is
//!
//! ```text
//! J = 1/G * sum_i min(rho_i * A_i, clip(rho_i, 1 - eps, 1 + eps) * A_i) - beta * KL
//! ```
//!
//! where `rho_i` is the importance ratio against the sampling policy and `KL`
//! is the mean per-token estimate `r - ln r - 1`, `r = pi_ref / pi_theta`.
//! [`grpo_objective`] reports `loss = -J`, which is what gets minimized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Granularity of the importance ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    /// One ratio per response: `exp(sum(new) - sum(old))`.
    #[default]
    Sequence,
    /// Per-token ratios; the clipped surrogate is averaged over tokens.
    TokenMean,
}

impl RatioMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RatioMode::Sequence => "sequence",
            RatioMode::TokenMean => "token_mean",
        }
    }
}

impl fmt::Display for RatioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RatioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequence" => Ok(RatioMode::Sequence),
            "token_mean" => Ok(RatioMode::TokenMean),
            other => Err(Error::InvalidConfig(format!(
                "unknown ratio mode `{other}` (expected `sequence` or `token_mean`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpoConfig<T> {
    /// Clip range, in `(0, 1)`.
    pub epsilon: T,
    /// KL coefficient, `>= 0`.
    pub beta: T,
    pub ratio_mode: RatioMode,
    /// Reward groups whose standard deviation falls below this get zero advantages.
    pub sigma_floor: T,
}

impl<T: Scalar> Default for GrpoConfig<T> {
    fn default() -> Self {
        Self {
            epsilon: T::of(0.2),
            beta: T::of(0.04),
            ratio_mode: RatioMode::Sequence,
            sigma_floor: T::of(1e-8),
        }
    }
}

impl<T: Scalar> GrpoConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1) (got {})",
                self.epsilon
            )));
        }
        if !(self.beta >= T::zero() && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be >= 0 (got {})",
                self.beta
            )));
        }
        if !(self.sigma_floor > T::zero() && self.sigma_floor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma_floor must be positive (got {})",
                self.sigma_floor
            )));
        }
        Ok(())
    }
}

/// One sampled response with per-token log-probabilities under the current,
/// sampling and reference policies.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRollout<T> {
    pub output_text: String,
    pub logprob_new: Vec<T>,
    pub logprob_old: Vec<T>,
    pub logprob_ref: Vec<T>,
    pub reward: T,
}

impl<T: Scalar> CandidateRollout<T> {
    pub fn new(
        output_text: impl Into<String>,
        logprob_new: Vec<T>,
        logprob_old: Vec<T>,
        logprob_ref: Vec<T>,
        reward: T,
    ) -> Result<Self> {
        let c = Self {
            output_text: output_text.into(),
            logprob_new,
            logprob_old,
            logprob_ref,
            reward,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, o, r) = (
            self.logprob_new.len(),
            self.logprob_old.len(),
            self.logprob_ref.len(),
        );
        if n != o || n != r {
            return Err(Error::LengthMismatch {
                new: n,
                old: o,
                reference: r,
            });
        }
        if n == 0 {
            return Err(Error::InvalidConfig(
                "log-probability lists must not be empty".into(),
            ));
        }
        let all = self
            .logprob_new
            .iter()
            .chain(&self.logprob_old)
            .chain(&self.logprob_ref);
        if let Some(bad) = all.into_iter().find(|&&x| x.is_nan() || x > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "log-probability {bad} is not <= 0"
            )));
        }
        if !self.reward.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "reward {} is not finite",
                self.reward
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.logprob_new.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logprob_new.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRollout<T> {
    pub candidates: Vec<CandidateRollout<T>>,
}

impl<T: Scalar> GroupRollout<T> {
    pub fn new(candidates: Vec<CandidateRollout<T>>) -> Result<Self> {
        let g = Self { candidates };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates.len() < 2 {
            return Err(Error::GroupTooSmall(self.candidates.len()));
        }
        self.candidates
            .iter()
            .try_for_each(CandidateRollout::validate)
    }

    pub fn rewards(&self) -> Vec<T> {
        self.candidates.iter().map(|c| c.reward).collect()
    }
}

/// `(R_i - mean) / std` with the population standard deviation; all zeros when
/// `std < sigma_floor`.
pub fn standardize_advantages<T: Scalar>(rewards: &[T], sigma_floor: T) -> Result<Vec<T>> {
    let g = rewards.len();
    if g < 2 {
        return Err(Error::GroupTooSmall(g));
    }
    let count = T::count(g);
    let mean = rewards.iter().copied().sum::<T>() / count;
    let var = rewards.iter().map(|&r| (r - mean) * (r - mean)).sum::<T>() / count;
    let std = var.sqrt();
    if std.is_nan() || std < sigma_floor {
        return Ok(vec![T::zero(); g]);
    }
    Ok(rewards.iter().map(|&r| (r - mean) / std).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImportanceRatio<T> {
    Sequence(T),
    PerToken(Vec<T>),
}

impl<T: Scalar> ImportanceRatio<T> {
    /// The sequence ratio, or the mean of per-token ratios.
    pub fn mean(&self) -> T {
        match self {
            ImportanceRatio::Sequence(r) => *r,
            ImportanceRatio::PerToken(rs) => rs.iter().copied().sum::<T>() / T::count(rs.len()),
        }
    }
}

pub fn importance_ratio<T: Scalar>(
    c: &CandidateRollout<T>,
    mode: RatioMode,
) -> Result<ImportanceRatio<T>> {
    c.validate()?;
    Ok(match mode {
        RatioMode::Sequence => {
            let diff: T = c
                .logprob_new
                .iter()
                .zip(&c.logprob_old)
                .map(|(&n, &o)| n - o)
                .sum();
            ImportanceRatio::Sequence(diff.exp())
        }
        RatioMode::TokenMean => ImportanceRatio::PerToken(
            c.logprob_new
                .iter()
                .zip(&c.logprob_old)
                .map(|(&n, &o)| (n - o).exp())
                .collect(),
        ),
    })
}

/// Mean over tokens of `r - ln r - 1` with `r = exp(ref - new)`.
pub fn kl_penalty<T: Scalar>(c: &CandidateRollout<T>) -> Result<T> {
    c.validate()?;
    Ok(kl_terms(c).0)
}

// (mean KL, d KL / d logprob_new_t)
fn kl_terms<T: Scalar>(c: &CandidateRollout<T>) -> (T, Vec<T>) {
    let len = T::count(c.len());
    let mut total = T::zero();
    let mut grad = Vec::with_capacity(c.len());
    for (&new, &reference) in c.logprob_new.iter().zip(&c.logprob_ref) {
        let x = reference - new;
        // exp(x) - x - 1, written to stay >= 0 near x = 0
        total += (x.exp_m1() - x).max(T::zero());
        grad.push(-x.exp_m1() / len);
    }
    (total / len, grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpoDiagnostics<T> {
    /// Share of ratios (per candidate, or per token in token mode) outside `[1-eps, 1+eps]`.
    pub clip_fraction: T,
    pub mean_ratio: T,
    pub mean_kl: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTerms<T> {
    pub advantage: T,
    /// Sequence ratio, or mean per-token ratio.
    pub ratio: T,
    pub kl: T,
    /// This candidate's clipped surrogate term before the `1/G` average.
    pub surrogate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrpoOutput<T> {
    pub loss: T,
    pub objective: T,
    pub surrogate: T,
    pub candidates: Vec<CandidateTerms<T>>,
    pub diagnostics: GrpoDiagnostics<T>,
}

impl<T: Scalar> GrpoOutput<T> {
    pub fn advantages(&self) -> Vec<T> {
        self.candidates.iter().map(|c| c.advantage).collect()
    }
}

pub fn grpo_objective<T: Scalar>(
    group: &GroupRollout<T>,
    cfg: &GrpoConfig<T>,
) -> Result<GrpoOutput<T>> {
    evaluate(group, cfg).map(|(out, _)| out)
}

/// Objective together with `d loss / d logprob_new[i][t]` for every candidate
/// `i` and token `t`. Policies chain these through their own parameters.
pub fn grpo_loss_gradient<T: Scalar>(
    group: &GroupRollout<T>,
    cfg: &GrpoConfig<T>,
) -> Result<(GrpoOutput<T>, Vec<Vec<T>>)> {
    evaluate(group, cfg)
}

fn evaluate<T: Scalar>(
    group: &GroupRollout<T>,
    cfg: &GrpoConfig<T>,
) -> Result<(GrpoOutput<T>, Vec<Vec<T>>)> {
    cfg.validate()?;
    group.validate()?;
    let g = T::count(group.candidates.len());
    let advantages = standardize_advantages(&group.rewards(), cfg.sigma_floor)?;
    let (lo, hi) = (T::one() - cfg.epsilon, T::one() + cfg.epsilon);

    let mut terms = Vec::with_capacity(group.candidates.len());
    let mut grads = Vec::with_capacity(group.candidates.len());
    let (mut clipped, mut ratio_count, mut ratio_sum) = (0usize, 0usize, T::zero());

    for (c, &adv) in group.candidates.iter().zip(&advantages) {
        // min(r*A, clip(r)*A) and its derivative wrt log r.
        let clipped_term = |r: T| {
            let unclipped = r * adv;
            let bounded = r.max(lo).min(hi) * adv;
            if unclipped <= bounded {
                (unclipped, unclipped)
            } else {
                (bounded, T::zero())
            }
        };

        let ratio = importance_ratio(c, cfg.ratio_mode)?;
        let (surrogate, mut grad) = match &ratio {
            ImportanceRatio::Sequence(r) => {
                let (v, d) = clipped_term(*r);
                (v, vec![d; c.len()])
            }
            ImportanceRatio::PerToken(rs) => {
                let len = T::count(rs.len());
                let mut v = T::zero();
                let mut d = Vec::with_capacity(rs.len());
                for &r in rs {
                    let (tv, td) = clipped_term(r);
                    v += tv;
                    d.push(td / len);
                }
                (v / len, d)
            }
        };
        match &ratio {
            ImportanceRatio::Sequence(r) => {
                clipped += usize::from(*r < lo || *r > hi);
                ratio_count += 1;
                ratio_sum += *r;
            }
            ImportanceRatio::PerToken(rs) => {
                clipped += rs.iter().filter(|&&r| r < lo || r > hi).count();
                ratio_count += rs.len();
                ratio_sum += rs.iter().copied().sum::<T>();
            }
        }

        let (kl, kl_grad) = kl_terms(c);
        for (d, k) in grad.iter_mut().zip(kl_grad) {
            *d = -(*d - cfg.beta * k) / g;
        }
        grads.push(grad);
        terms.push(CandidateTerms {
            advantage: adv,
            ratio: ratio.mean(),
            kl,
            surrogate,
        });
    }

    let surrogate = terms.iter().map(|t| t.surrogate).sum::<T>() / g;
    let mean_kl = terms.iter().map(|t| t.kl).sum::<T>() / g;
    let objective = surrogate - cfg.beta * mean_kl;
    let out = GrpoOutput {
        loss: -objective,
        objective,
        surrogate,
        candidates: terms,
        diagnostics: GrpoDiagnostics {
            clip_fraction: T::count(clipped) / T::count(ratio_count),
            mean_ratio: ratio_sum / T::count(ratio_count),
            mean_kl,
        },
    };
    Ok((out, grads))
}
