//! ROUGE-1/2/L F1 scores between steps and the step-distance cost matrix.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::segmentation::{tokenize, StepSequence, TokenList};

/// ROUGE-N F1 with clipped multiset n-gram counts.
///
/// When neither side has an n-gram of order `n` the score is 1 for equal token
/// lists and 0 otherwise; when only one side lacks n-grams it is 0.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn rouge_n<T: Scalar>(candidate: &[String], reference: &[String], n: usize) -> T {
    assert!(n >= 1, "n-gram order must be positive");
    let cand = ngram_counts(candidate, n);
    let refr = ngram_counts(reference, n);
    let cand_total = candidate.len().saturating_sub(n - 1);
    let ref_total = reference.len().saturating_sub(n - 1);

    match (cand_total, ref_total) {
        (0, 0) => {
            return if candidate == reference {
                T::one()
            } else {
                T::zero()
            };
        }
        (0, _) | (_, 0) => return T::zero(),
        _ => {}
    }

    let overlap: usize = cand
        .iter()
        .map(|(gram, &c)| c.min(refr.get(gram).copied().unwrap_or(0)))
        .sum();
    f1(overlap, cand_total, ref_total)
}

/// ROUGE-L F1 from the longest common subsequence.
pub fn rouge_l<T: Scalar>(candidate: &[String], reference: &[String]) -> T {
    match (candidate.is_empty(), reference.is_empty()) {
        (true, true) => return T::one(),
        (true, false) | (false, true) => return T::zero(),
        _ => {}
    }
    let lcs = lcs_len(candidate, reference);
    f1(lcs, candidate.len(), reference.len())
}

/// Mean of ROUGE-1, ROUGE-2 and ROUGE-L.
pub fn rouge_avg<T: Scalar>(candidate: &TokenList, reference: &TokenList) -> T {
    let r1: T = rouge_n(candidate, reference, 1);
    let r2: T = rouge_n(candidate, reference, 2);
    let rl: T = rouge_l(candidate, reference);
    (r1 + r2 + rl) / T::of(3.0)
}

/// `1 - rouge_avg(tokenize(generated), tokenize(reference))`.
pub fn step_distance<T: Scalar>(generated: &str, reference: &str) -> T {
    token_distance(&tokenize(generated), &tokenize(reference))
}

fn token_distance<T: Scalar>(generated: &TokenList, reference: &TokenList) -> T {
    T::one() - rouge_avg::<T>(generated, reference)
}

// With P = k/c and R = k/r, 2PR/(P+R) reduces to 2k/(c+r).
fn f1<T: Scalar>(overlap: usize, cand_total: usize, ref_total: usize) -> T {
    if overlap == 0 {
        return T::zero();
    }
    T::count(2 * overlap) / T::count(cand_total + ref_total)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Row-major `rows x cols` grid of step distances.
///
/// Row `i` corresponds to reference step `i`, column `j` to generated step `j`.
/// Every entry lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        for (idx, &v) in data.iter().enumerate() {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidCost {
                    row: idx / cols.max(1),
                    col: idx % cols.max(1),
                    value: v.to_string(),
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::ShapeMismatch {
                rows: n,
                cols: m,
                len: n * m - m + bad.len(),
            });
        }
        Self::new(n, m, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Copy of this matrix with extra columns inserted before column `at`;
    /// `extra[i]` holds the new entries of row `i`.
    pub fn with_columns_inserted(&self, at: usize, extra: &[Vec<T>]) -> Result<Self> {
        assert!(at <= self.cols);
        let added = extra.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut r = self.row(i).to_vec();
            let ins = extra.get(i).cloned().unwrap_or_default();
            if ins.len() != added {
                return Err(Error::ShapeMismatch {
                    rows: self.rows,
                    cols: self.cols + added,
                    len: ins.len(),
                });
            }
            r.splice(at..at, ins);
            rows.push(r);
        }
        Self::from_rows(&rows)
    }
}

/// Distance matrix between reference steps (rows) and generated steps (columns).
pub fn build_cost_matrix<T: Scalar>(
    reference: &StepSequence,
    generated: &StepSequence,
) -> Result<CostMatrix<T>> {
    build_cost_matrix_from_steps(reference.steps(), generated.steps())
}

pub fn build_cost_matrix_from_steps<T: Scalar>(
    reference: &[String],
    generated: &[String],
) -> Result<CostMatrix<T>> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let ref_tokens: Vec<TokenList> = reference.iter().map(|s| tokenize(s)).collect();
    let gen_tokens: Vec<TokenList> = generated.iter().map(|s| tokenize(s)).collect();
    let mut data = Vec::with_capacity(reference.len() * generated.len());
    for r in &ref_tokens {
        for g in &gen_tokens {
            data.push(token_distance::<T>(g, r));
        }
    }
    CostMatrix::new(reference.len(), generated.len(), data)
}
