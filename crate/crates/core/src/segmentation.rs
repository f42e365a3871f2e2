//! Rule-based splitting of reasoning prose into steps, and step tokenization.
//!
//! A step ends after a run of terminal delimiters (`.`, `!`, `?`, `;`) or at a
//! line break. The delimiter run stays attached to its step, together with any
//! closing quotes or brackets that immediately follow it. A period does not end
//! a step when it belongs to one of [`ABBREVIATIONS`] or sits between two
//! digits.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Abbreviations whose periods never terminate a step. Matched case-insensitively.
pub const ABBREVIATIONS: &[&str] = &["e.g.", "i.e.", "etc.", "dr.", "mr.", "ms.", "vs.", "fig."];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Generated,
    Reference,
}

/// Unsegmented reasoning text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTrace {
    text: String,
    origin: Origin,
}

impl RawTrace {
    /// Reference traces must contain something other than whitespace.
    pub fn new(text: impl Into<String>, origin: Origin) -> Result<Self> {
        let text = text.into();
        if origin == Origin::Reference && text.trim().is_empty() {
            return Err(Error::EmptyReference);
        }
        Ok(Self { text, origin })
    }

    pub fn generated(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            origin: Origin::Generated,
        }
    }

    pub fn reference(text: impl Into<String>) -> Result<Self> {
        Self::new(text, Origin::Reference)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }
}

/// Ordered, trimmed, non-empty steps of a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSequence {
    steps: Vec<String>,
    origin: Origin,
}

impl StepSequence {
    pub fn steps(&self) -> &[String] {
        &self.steps
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Steps joined with single spaces.
    pub fn joined(&self) -> String {
        self.steps.join(" ")
    }

    pub fn into_steps(self) -> Vec<String> {
        self.steps
    }
}

/// Lowercased alphanumeric tokens of a step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl std::ops::Deref for TokenList {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for TokenList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}

pub fn segment(trace: &RawTrace) -> StepSequence {
    StepSequence {
        steps: segment_text(trace.text()),
        origin: trace.origin(),
    }
}

/// Splits `text` into steps; see the module docs for the rule.
pub fn segment_text(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut steps = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    let mut step_start = 0;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' || c == '\r' {
            flush(&mut steps, &mut current);
            i += 1;
            step_start = i;
            continue;
        }
        current.push(c);
        i += 1;
        if is_delimiter(c) && ends_step(&chars, step_start, i - 1) {
            while i < chars.len() && is_delimiter(chars[i]) {
                current.push(chars[i]);
                i += 1;
            }
            while i < chars.len() && is_closer(chars[i]) {
                current.push(chars[i]);
                i += 1;
            }
            flush(&mut steps, &mut current);
            step_start = i;
        }
    }
    flush(&mut steps, &mut current);
    steps
}

/// Lowercases `step` and splits it on every non-alphanumeric character.
pub fn tokenize(step: &str) -> TokenList {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in step.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenList(tokens)
}

fn is_delimiter(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | ';')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201D}' | '\u{2019}')
}

fn ends_step(chars: &[char], step_start: usize, at: usize) -> bool {
    if chars[at] != '.' {
        return true;
    }
    let digit_before = at > 0 && chars[at - 1].is_ascii_digit();
    let digit_after = chars.get(at + 1).is_some_and(|c| c.is_ascii_digit());
    if digit_before && digit_after {
        return false;
    }
    !inside_abbreviation(chars, step_start, at)
}

fn inside_abbreviation(chars: &[char], step_start: usize, at: usize) -> bool {
    let mut start = at;
    while start > step_start && !chars[start - 1].is_whitespace() {
        start -= 1;
    }
    while start < at && !chars[start].is_alphanumeric() {
        start += 1;
    }
    let mut end = at;
    while end < chars.len() && !chars[end].is_whitespace() {
        end += 1;
    }
    let word: Vec<char> = chars[start..end]
        .iter()
        .flat_map(|c| c.to_lowercase())
        .collect();
    // Lowercasing is length-preserving for the ASCII abbreviations we match.
    let offset = at - start;
    ABBREVIATIONS.iter().any(|abbr| {
        let abbr: Vec<char> = abbr.chars().collect();
        offset < abbr.len() && word.len() >= abbr.len() && word[..abbr.len()] == abbr[..]
    })
}

fn flush(steps: &mut Vec<String>, current: &mut String) {
    let normalized = current.split_whitespace().collect::<Vec<_>>().join(" ");
    current.clear();
    if normalized.is_empty() {
        return;
    }
    // A stray punctuation-only fragment joins the step before it.
    if !normalized.chars().any(char::is_alphanumeric) {
        if let Some(last) = steps.last_mut() {
            last.push(' ');
            last.push_str(&normalized);
            return;
        }
    }
    steps.push(normalized);
}
