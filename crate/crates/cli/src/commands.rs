use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use procreward_core::alignment::{subsequence_dtw, AlignmentConfig};
use procreward_core::dataset::{load_outputs, load_rollouts, load_samples, TrainingSample};
use procreward_core::grpo::{grpo_objective, GrpoConfig};
use procreward_core::numfmt::{round12, sig12};
use procreward_core::rewards::{total_reward, RewardBreakdown, RewardConfig};
use procreward_core::segmentation::{segment, RawTrace};
use procreward_core::sim::{run_simulation, PoolConfig, RewardVariant, SimConfig};
use procreward_core::similarity::build_cost_matrix;

use crate::args::Shared;
use crate::CliError;

type CliResult<T = ()> = Result<T, CliError>;

pub fn validate_shared(shared: &Shared) -> CliResult {
    reward_config(shared).validate()?;
    grpo_config(shared).validate()?;
    Ok(())
}

fn alignment(shared: &Shared) -> AlignmentConfig {
    AlignmentConfig {
        k_ref: shared.k_ref,
        k_target: shared.k_target,
    }
}

fn reward_config(shared: &Shared) -> RewardConfig<f64> {
    RewardConfig {
        alpha: shared.alpha,
        alignment: alignment(shared),
        ..RewardConfig::default()
    }
}

fn grpo_config(shared: &Shared) -> GrpoConfig<f64> {
    GrpoConfig {
        epsilon: shared.epsilon,
        beta: shared.beta,
        ratio_mode: shared.ratio_mode,
        ..GrpoConfig::default()
    }
}

#[derive(Serialize)]
struct ConfigEcho {
    alpha: f64,
    k_ref: usize,
    k_target: usize,
    epsilon: f64,
    beta: f64,
    ratio_mode: &'static str,
    seed: u64,
}

impl ConfigEcho {
    fn new(shared: &Shared) -> Self {
        Self {
            alpha: shared.alpha,
            k_ref: shared.k_ref,
            k_target: shared.k_target,
            epsilon: shared.epsilon,
            beta: shared.beta,
            ratio_mode: shared.ratio_mode.as_str(),
            seed: shared.seed,
        }
    }

    fn comment_lines(&self) -> String {
        format!(
            "# alpha={}\n# k_ref={}\n# k_target={}\n# epsilon={}\n# beta={}\n# ratio_mode={}\n# seed={}\n",
            self.alpha, self.k_ref, self.k_target, self.epsilon, self.beta, self.ratio_mode, self.seed
        )
    }
}

#[derive(Serialize)]
struct Scores {
    r_proc: f64,
    r_acc: f64,
    r_fmt: f64,
    total: f64,
    sdtw_distance: Option<f64>,
}

impl From<RewardBreakdown<f64>> for Scores {
    fn from(b: RewardBreakdown<f64>) -> Self {
        Self {
            r_proc: round12(b.r_proc),
            r_acc: round12(b.r_acc),
            r_fmt: round12(b.r_fmt),
            total: round12(b.total),
            sdtw_distance: b.sdtw_distance.map(round12),
        }
    }
}

/// `@path` reads the file; anything else is taken literally.
fn resolve_text(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read `{path}`: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn open_output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::usage(format!("cannot create `{}`: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(shared: &Shared, body: &[u8]) -> CliResult {
    let mut out = open_output(&shared.output)?;
    out.write_all(body)
        .and_then(|()| out.flush())
        .map_err(|e| CliError::internal(format!("write failed: {e}")))
}

fn json_line(buf: &mut Vec<u8>, value: &impl Serialize) -> CliResult {
    serde_json::to_writer(&mut *buf, value).map_err(|e| CliError::internal(e.to_string()))?;
    buf.push(b'\n');
    Ok(())
}

fn load(path: &Path, what: &str) -> CliResult<Vec<TrainingSample>> {
    load_samples(path).map_err(|e| CliError::usage(format!("{what} `{}`: {e}", path.display())))
}

fn index_samples(samples: &[TrainingSample]) -> HashMap<&str, &TrainingSample> {
    samples.iter().map(|s| (s.id.as_str(), s)).collect()
}

pub fn score(shared: &Shared, generated: &str, reference: &str, answer: &str) -> CliResult {
    #[derive(Serialize)]
    struct Record {
        config: ConfigEcho,
        #[serde(flatten)]
        scores: Scores,
    }
    let sample = TrainingSample {
        id: "inline".into(),
        video_ref: String::new(),
        question: String::new(),
        answer_gt: resolve_text(answer)?,
        reference_trace: resolve_text(reference)?,
    };
    let breakdown = total_reward(&resolve_text(generated)?, &sample, &reward_config(shared))?;
    let mut buf = Vec::new();
    json_line(
        &mut buf,
        &Record {
            config: ConfigEcho::new(shared),
            scores: breakdown.into(),
        },
    )?;
    emit(shared, &buf)
}

#[derive(Serialize)]
struct ConfigRecord {
    record: &'static str,
    #[serde(flatten)]
    config: ConfigEcho,
}

impl ConfigRecord {
    fn new(shared: &Shared) -> Self {
        Self {
            record: "config",
            config: ConfigEcho::new(shared),
        }
    }
}

pub fn score_batch(shared: &Shared, samples: &Path, outputs: &Path) -> CliResult {
    #[derive(Serialize)]
    struct Record<'a> {
        record: &'static str,
        line: usize,
        sample_id: &'a str,
        #[serde(flatten)]
        scores: Scores,
    }
    let samples = load(samples, "samples")?;
    let by_id = index_samples(&samples);
    let outputs = load_outputs(outputs)
        .map_err(|e| CliError::usage(format!("outputs `{}`: {e}", outputs.display())))?;
    let cfg = reward_config(shared);

    let scored = outputs
        .par_iter()
        .enumerate()
        .map(|(i, o)| {
            let sample = by_id.get(o.sample_id.as_str()).ok_or_else(|| {
                CliError::usage(format!(
                    "output {}: unknown sample_id `{}`",
                    i + 1,
                    o.sample_id
                ))
            })?;
            Ok(Record {
                record: "score",
                line: i + 1,
                sample_id: &o.sample_id,
                scores: total_reward(&o.output_text, sample, &cfg)?.into(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut buf = Vec::new();
    json_line(&mut buf, &ConfigRecord::new(shared))?;
    for r in &scored {
        json_line(&mut buf, r)?;
    }
    emit(shared, &buf)
}

pub fn align(shared: &Shared, reference: &str, generated: &str) -> CliResult {
    let reference = segment(&RawTrace::reference(resolve_text(reference)?)?);
    let generated = segment(&RawTrace::generated(resolve_text(generated)?));
    if reference.is_empty() {
        return Err(procreward_core::Error::EmptyReference.into());
    }
    if generated.is_empty() {
        return Err(CliError::usage("generated reasoning has no steps"));
    }
    let costs = build_cost_matrix::<f64>(&reference, &generated)?;
    let result = subsequence_dtw(&costs, alignment(shared))?;

    let mut s = ConfigEcho::new(shared).comment_lines();
    s += &format!("reference steps: {}\n", reference.len());
    for (i, step) in reference.steps().iter().enumerate() {
        s += &format!("  r{}: {step}\n", i + 1);
    }
    s += &format!("generated steps: {}\n", generated.len());
    for (j, step) in generated.steps().iter().enumerate() {
        s += &format!("  g{}: {step}\n", j + 1);
    }
    s += "cost matrix (rows = reference, columns = generated):\n";
    s += &format!("{:>5}", "");
    for j in 1..=costs.cols() {
        s += &format!(" {:>7}", format!("g{j}"));
    }
    s.push('\n');
    for i in 0..costs.rows() {
        s += &format!("{:>5}", format!("r{}", i + 1));
        for &c in costs.row(i) {
            s += &format!(" {c:>7.4}");
        }
        s.push('\n');
    }
    let path: Vec<String> = result
        .path
        .iter()
        .map(|(r, c)| format!("({},{})", r + 1, c + 1))
        .collect();
    s += &format!("path: {}\n", path.join(" "));
    s += &format!("start_col: {}\n", result.start_col + 1);
    s += &format!("end_col: {}\n", result.end_col + 1);
    s += &format!("D_sdtw: {:.4}\n", result.distance);
    emit(shared, s.as_bytes())
}

pub fn reward_group(shared: &Shared, rollouts: &Path, samples: &Path) -> CliResult {
    #[derive(Serialize)]
    struct CandidateRecord<'a> {
        record: &'static str,
        sample_id: &'a str,
        candidate: usize,
        #[serde(flatten)]
        scores: Scores,
        advantage: f64,
        ratio: f64,
        kl: f64,
        surrogate: f64,
    }
    #[derive(Serialize)]
    struct GroupRecord<'a> {
        record: &'static str,
        sample_id: &'a str,
        candidates: usize,
        ratio_mode: &'static str,
        mean_reward: f64,
        loss: f64,
        objective: f64,
        surrogate: f64,
        clip_fraction: f64,
        mean_ratio: f64,
        mean_kl: f64,
    }

    let samples = load(samples, "samples")?;
    let by_id = index_samples(&samples);
    let records = load_rollouts(rollouts)
        .map_err(|e| CliError::usage(format!("rollouts `{}`: {e}", rollouts.display())))?;
    let reward_cfg = reward_config(shared);
    let grpo_cfg = grpo_config(shared);

    let groups = records
        .par_iter()
        .map(|rec| {
            let sample = by_id.get(rec.sample_id.as_str()).ok_or_else(|| {
                CliError::usage(format!("unknown sample_id `{}` in rollouts", rec.sample_id))
            })?;
            let breakdowns = rec
                .candidates
                .iter()
                .map(|c| total_reward(&c.output_text, sample, &reward_cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let rewards: Vec<f64> = breakdowns.iter().map(|b| b.total).collect();
            let out = grpo_objective(&rec.to_group(&rewards)?, &grpo_cfg)?;

            let mut buf = Vec::new();
            for (i, (b, terms)) in breakdowns.iter().zip(&out.candidates).enumerate() {
                json_line(
                    &mut buf,
                    &CandidateRecord {
                        record: "candidate",
                        sample_id: &rec.sample_id,
                        candidate: i,
                        scores: (*b).into(),
                        advantage: round12(terms.advantage),
                        ratio: round12(terms.ratio),
                        kl: round12(terms.kl),
                        surrogate: round12(terms.surrogate),
                    },
                )?;
            }
            json_line(
                &mut buf,
                &GroupRecord {
                    record: "group",
                    sample_id: &rec.sample_id,
                    candidates: rewards.len(),
                    ratio_mode: grpo_cfg.ratio_mode.as_str(),
                    mean_reward: round12(rewards.iter().sum::<f64>() / rewards.len() as f64),
                    loss: round12(out.loss),
                    objective: round12(out.objective),
                    surrogate: round12(out.surrogate),
                    clip_fraction: round12(out.diagnostics.clip_fraction),
                    mean_ratio: round12(out.diagnostics.mean_ratio),
                    mean_kl: round12(out.diagnostics.mean_kl),
                },
            )?;
            Ok(buf)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut buf = Vec::new();
    json_line(&mut buf, &ConfigRecord::new(shared))?;
    for g in groups {
        buf.extend(g);
    }
    emit(shared, &buf)
}

pub struct SimFlags {
    pub reward_variant: RewardVariant,
    pub iterations: usize,
    pub group_size: usize,
    pub learning_rate: f64,
    pub temperature: f64,
    pub answer_accuracy: f64,
}

pub fn simulate(shared: &Shared, samples: &Path, flags: SimFlags) -> CliResult {
    let cfg = SimConfig {
        group_size: flags.group_size,
        iterations: flags.iterations,
        learning_rate: flags.learning_rate,
        seed: shared.seed,
        reward_variant: flags.reward_variant,
        alpha: shared.alpha,
        alignment: alignment(shared),
        grpo: grpo_config(shared),
        temperature: flags.temperature,
        answer_accuracy: flags.answer_accuracy,
        pool: PoolConfig::default(),
    };
    cfg.validate()?;
    let samples = load(samples, "samples")?;
    let report = run_simulation(&cfg, &samples)?;

    let mut buf = ConfigEcho::new(shared).comment_lines().into_bytes();
    buf.extend(
        format!(
            "# reward_variant={}\n# iterations={}\n# group_size={}\n# learning_rate={}\n# temperature={}\n# answer_accuracy={}\n# samples={}\n",
            cfg.reward_variant,
            cfg.iterations,
            cfg.group_size,
            sig12(cfg.learning_rate),
            sig12(cfg.temperature),
            sig12(cfg.answer_accuracy),
            samples.len()
        )
        .into_bytes(),
    );
    report
        .write_csv(&mut buf)
        .map_err(|e| CliError::internal(e.to_string()))?;
    emit(shared, &buf)
}
