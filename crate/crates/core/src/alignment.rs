//! Subsequence DTW with bounded jumps, classic DTW, and an exhaustive oracle.
//!
//! The subsequence recurrence over an `n x m` cost matrix `D` (rows are
//! reference steps, columns generated steps) uses an accumulator `P` of size
//! `(n+1) x (m+1)` with `P[0][j] = 0` and `P[i][0] = inf` for `i >= 1`:
//!
//! ```text
//! P[i][j] = D[i][j] + min( P[i-1][j-1],
//!                          min_{1<=k<=min(k_ref, i)}    P[i-k][j],
//!                          min_{1<=k<=min(k_target, j)} P[i][j-k] )
//! ```
//!
//! and the distance is `min_j P[n][j]`. Skipped rows or columns cost nothing;
//! only the destination cell of each move is charged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::CostMatrix;

/// Largest matrix `brute_force_sdtw` will enumerate.
pub const BRUTE_FORCE_MAX_ROWS: usize = 6;
pub const BRUTE_FORCE_MAX_COLS: usize = 7;

/// Maximum jump along the reference (rows) and target (columns) axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignmentConfig {
    pub k_ref: usize,
    pub k_target: usize,
}

impl AlignmentConfig {
    pub fn new(k_ref: usize, k_target: usize) -> Result<Self> {
        let cfg = Self { k_ref, k_target };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_ref == 0 || self.k_target == 0 {
            return Err(Error::InvalidConfig(format!(
                "jump limits must be >= 1 (k_ref={}, k_target={})",
                self.k_ref, self.k_target
            )));
        }
        Ok(())
    }
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            k_ref: 2,
            k_target: 2,
        }
    }
}

/// Optimal subsequence alignment.
///
/// `path` lists the charged cells as zero-based `(row, col)` pairs in order.
/// `start_col` and `end_col` are the columns of the first and last cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult<T> {
    pub distance: T,
    pub path: Vec<(usize, usize)>,
    pub start_col: usize,
    pub end_col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Diag,
    Up(usize),
    Left(usize),
}

pub fn subsequence_dtw<T: Scalar>(
    costs: &CostMatrix<T>,
    cfg: AlignmentConfig,
) -> Result<AlignmentResult<T>> {
    cfg.validate()?;
    let (n, m) = (costs.rows(), costs.cols());
    if n == 0 || m == 0 {
        return Err(Error::EmptyMatrix { rows: n, cols: m });
    }

    // Any admissible path costs at most n*m, so this acts as infinity.
    let unreachable = T::count(n * m + 1);
    let width = m + 1;
    let mut acc = vec![T::zero(); (n + 1) * width];
    let mut moves = vec![Move::Diag; (n + 1) * width];
    for i in 1..=n {
        acc[i * width] = unreachable;
    }

    for i in 1..=n {
        for j in 1..=m {
            let mut best = acc[(i - 1) * width + j - 1];
            let mut mv = Move::Diag;
            for k in 1..=cfg.k_ref.min(i) {
                let v = acc[(i - k) * width + j];
                if v < best {
                    best = v;
                    mv = Move::Up(k);
                }
            }
            for k in 1..=cfg.k_target.min(j) {
                let v = acc[i * width + j - k];
                if v < best {
                    best = v;
                    mv = Move::Left(k);
                }
            }
            acc[i * width + j] = costs.get(i - 1, j - 1) + best;
            moves[i * width + j] = mv;
        }
    }

    let mut end = 1;
    for j in 2..=m {
        if acc[n * width + j] < acc[n * width + end] {
            end = j;
        }
    }
    let distance = acc[n * width + end];

    let mut path = Vec::new();
    let (mut i, mut j) = (n, end);
    while i > 0 {
        path.push((i - 1, j - 1));
        match moves[i * width + j] {
            Move::Diag => {
                i -= 1;
                j -= 1;
            }
            Move::Up(k) => i -= k,
            Move::Left(k) => j -= k,
        }
    }
    path.reverse();

    Ok(AlignmentResult {
        distance,
        start_col: path[0].1,
        end_col: end - 1,
        path,
    })
}

/// Classic DTW: path fixed from `(0, 0)` to `(n-1, m-1)` with unit
/// diagonal, vertical and horizontal steps, every visited cell charged.
pub fn naive_dtw<T: Scalar>(costs: &CostMatrix<T>) -> Result<T> {
    let (n, m) = (costs.rows(), costs.cols());
    if n == 0 || m == 0 {
        return Err(Error::EmptyMatrix { rows: n, cols: m });
    }
    let mut prev = vec![T::zero(); m];
    let mut cur = vec![T::zero(); m];
    for i in 0..n {
        for j in 0..m {
            let best = match (i, j) {
                (0, 0) => T::zero(),
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j - 1].min(prev[j]).min(cur[j - 1]),
            };
            cur[j] = costs.get(i, j) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Minimum subsequence-DTW cost by explicit enumeration of every admissible
/// path. Exponential; limited to [`BRUTE_FORCE_MAX_ROWS`] x [`BRUTE_FORCE_MAX_COLS`].
pub fn brute_force_sdtw<T: Scalar>(costs: &CostMatrix<T>, cfg: AlignmentConfig) -> Result<T> {
    cfg.validate()?;
    let (n, m) = (costs.rows(), costs.cols());
    if n == 0 || m == 0 {
        return Err(Error::EmptyMatrix { rows: n, cols: m });
    }
    if n > BRUTE_FORCE_MAX_ROWS || m > BRUTE_FORCE_MAX_COLS {
        return Err(Error::TooLarge {
            rows: n,
            cols: m,
            max_rows: BRUTE_FORCE_MAX_ROWS,
            max_cols: BRUTE_FORCE_MAX_COLS,
        });
    }

    struct Walk<'a, T> {
        costs: &'a CostMatrix<T>,
        cfg: AlignmentConfig,
        best: Option<T>,
    }

    impl<T: Scalar> Walk<'_, T> {
        // (row, col) are 1-based here; row 0 is the free start row.
        fn visit(&mut self, row: usize, col: usize, so_far: T) {
            let cost = so_far + self.costs.get(row - 1, col - 1);
            let (n, m) = (self.costs.rows(), self.costs.cols());
            if row == n {
                self.best = Some(match self.best {
                    Some(b) if b <= cost => b,
                    _ => cost,
                });
            }
            if row < n && col < m {
                self.visit(row + 1, col + 1, cost);
            }
            for k in 1..=self.cfg.k_ref {
                if row + k <= n {
                    self.visit(row + k, col, cost);
                }
            }
            for k in 1..=self.cfg.k_target {
                if col + k <= m {
                    self.visit(row, col + k, cost);
                }
            }
        }
    }

    let mut walk = Walk {
        costs,
        cfg,
        best: None,
    };
    for start in 0..=m {
        if start < m {
            walk.visit(1, start + 1, T::zero());
        }
        if start >= 1 {
            for k in 1..=cfg.k_ref.min(n) {
                walk.visit(k, start, T::zero());
            }
        }
    }
    Ok(walk.best.expect("at least one admissible path exists"))
}
