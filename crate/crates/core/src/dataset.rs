//! Line-delimited JSON records: training samples and logged rollout groups.
//!
//! Both loaders report errors with the 1-based line number of the offending
//! record. Blank lines are skipped but still counted.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::grpo::{CandidateRollout, GroupRollout};

/// One supervised example: a question about a video, its answer, and the
/// annotated reference reasoning. `video_ref` is carried along, never opened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSample {
    pub id: String,
    pub video_ref: String,
    pub question: String,
    pub answer_gt: String,
    pub reference_trace: String,
}

impl TrainingSample {
    pub const FIELDS: [&'static str; 5] = [
        "id",
        "video_ref",
        "question",
        "answer_gt",
        "reference_trace",
    ];

    pub fn validate(&self) -> Result<()> {
        if self.answer_gt.trim().is_empty() {
            return Err(Error::EmptyGroundTruth);
        }
        if self.reference_trace.trim().is_empty() {
            return Err(Error::EmptyReference);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloutCandidate {
    pub output_text: String,
    pub logprob_new: Vec<f64>,
    pub logprob_old: Vec<f64>,
    pub logprob_ref: Vec<f64>,
}

impl RolloutCandidate {
    pub const FIELDS: [&'static str; 4] =
        ["output_text", "logprob_new", "logprob_old", "logprob_ref"];

    /// Pairs the logged log-probabilities with a reward.
    pub fn to_rollout(&self, reward: f64) -> Result<CandidateRollout<f64>> {
        CandidateRollout::new(
            self.output_text.clone(),
            self.logprob_new.clone(),
            self.logprob_old.clone(),
            self.logprob_ref.clone(),
            reward,
        )
    }
}

/// A logged group of candidate outputs for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloutRecord {
    pub sample_id: String,
    pub candidates: Vec<RolloutCandidate>,
}

impl RolloutRecord {
    pub const FIELDS: [&'static str; 2] = ["sample_id", "candidates"];

    pub fn validate(&self) -> Result<()> {
        if self.candidates.len() < 2 {
            return Err(Error::GroupTooSmall(self.candidates.len()));
        }
        Ok(())
    }

    /// Builds a scored group; `rewards` must line up with `candidates`.
    pub fn to_group(&self, rewards: &[f64]) -> Result<GroupRollout<f64>> {
        assert_eq!(rewards.len(), self.candidates.len());
        let candidates = self
            .candidates
            .iter()
            .zip(rewards)
            .map(|(c, &r)| c.to_rollout(r))
            .collect::<Result<Vec<_>>>()?;
        GroupRollout::new(candidates)
    }
}

/// A raw model output to be scored against the sample it answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOutput {
    pub sample_id: String,
    pub output_text: String,
}

impl ModelOutput {
    pub const FIELDS: [&'static str; 2] = ["sample_id", "output_text"];
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<TrainingSample>> {
    read_samples(BufReader::new(File::open(path)?))
}

pub fn read_samples(reader: impl BufRead) -> Result<Vec<TrainingSample>> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (line, obj) in records(reader) {
        let line_no = line;
        let sample: TrainingSample = decode(line_no, obj?, &TrainingSample::FIELDS)?;
        for (field, value) in [
            ("id", &sample.id),
            ("answer_gt", &sample.answer_gt),
            ("reference_trace", &sample.reference_trace),
        ] {
            if value.trim().is_empty() {
                return Err(Error::InvalidField {
                    line: line_no,
                    field: field.into(),
                    reason: "must not be empty".into(),
                });
            }
        }
        if let Some(&first_line) = seen.get(&sample.id) {
            return Err(Error::DuplicateId {
                id: sample.id,
                first_line,
                second_line: line_no,
            });
        }
        seen.insert(sample.id.clone(), line_no);
        out.push(sample);
    }
    Ok(out)
}

pub fn load_rollouts(path: impl AsRef<Path>) -> Result<Vec<RolloutRecord>> {
    read_rollouts(BufReader::new(File::open(path)?))
}

pub fn read_rollouts(reader: impl BufRead) -> Result<Vec<RolloutRecord>> {
    let mut out = Vec::new();
    for (line, obj) in records(reader) {
        let mut obj = obj?;
        if let Some(Value::Array(cands)) = obj.get_mut("candidates") {
            for (idx, c) in cands.iter().enumerate() {
                let Value::Object(c) = c else {
                    return Err(Error::InvalidField {
                        line,
                        field: format!("candidates[{idx}]"),
                        reason: "expected an object".into(),
                    });
                };
                if let Some(missing) = RolloutCandidate::FIELDS
                    .iter()
                    .find(|f| !c.contains_key(**f))
                {
                    return Err(Error::MissingField {
                        line,
                        field: missing,
                    });
                }
            }
        }
        let record: RolloutRecord = decode(line, obj, &RolloutRecord::FIELDS)?;
        record.validate().map_err(|e| Error::AtLine {
            line,
            source: Box::new(e),
        })?;
        for (idx, c) in record.candidates.iter().enumerate() {
            c.to_rollout(0.0).map_err(|e| Error::InvalidCandidate {
                line,
                candidate: idx,
                source: Box::new(e),
            })?;
        }
        out.push(record);
    }
    Ok(out)
}

pub fn load_outputs(path: impl AsRef<Path>) -> Result<Vec<ModelOutput>> {
    read_outputs(BufReader::new(File::open(path)?))
}

pub fn read_outputs(reader: impl BufRead) -> Result<Vec<ModelOutput>> {
    records(reader)
        .map(|(line, obj)| decode(line, obj?, &ModelOutput::FIELDS))
        .collect()
}

pub fn save_samples(path: impl AsRef<Path>, samples: &[TrainingSample]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), samples)
}

pub fn save_rollouts(path: impl AsRef<Path>, records: &[RolloutRecord]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}

pub fn write_records<R: Serialize>(mut writer: impl Write, records: &[R]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

type Record = (usize, Result<Map<String, Value>>);

fn records(reader: impl BufRead) -> impl Iterator<Item = Record> {
    reader.lines().enumerate().filter_map(|(idx, line)| {
        let line_no = idx + 1;
        let text = match line {
            Ok(t) => t,
            Err(e) => return Some((line_no, Err(e.into()))),
        };
        if text.trim().is_empty() {
            return None;
        }
        let parsed = match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(map)) => Ok(map),
            Ok(_) => Err(Error::Parse {
                line: line_no,
                message: "expected a JSON object".into(),
            }),
            Err(e) => Err(Error::Parse {
                line: line_no,
                message: e.to_string(),
            }),
        };
        Some((line_no, parsed))
    })
}

fn decode<T: DeserializeOwned>(
    line: usize,
    obj: Map<String, Value>,
    fields: &[&'static str],
) -> Result<T> {
    if let Some(missing) = fields.iter().find(|f| !obj.contains_key(**f)) {
        return Err(Error::MissingField {
            line,
            field: missing,
        });
    }
    if let Some(extra) = obj.keys().find(|k| !fields.contains(&k.as_str())) {
        return Err(Error::InvalidField {
            line,
            field: extra.clone(),
            reason: "unknown field".into(),
        });
    }
    // Name the first field that fails to decode on its own type.
    let bad_field = |obj: &Map<String, Value>| {
        fields
            .iter()
            .find(|f| match &obj[**f] {
                Value::String(_) => false,
                Value::Array(_) => **f != "candidates" && !f.starts_with("logprob"),
                _ => true,
            })
            .map_or_else(|| "record".to_string(), |f| f.to_string())
    };
    let field = bad_field(&obj);
    serde_json::from_value(Value::Object(obj)).map_err(|e| Error::InvalidField {
        line,
        field,
        reason: e.to_string(),
    })
}
