//! Systematic staircase LDPC codes.
//!
//! A parity-check matrix is split as `H = (H^X, H^Z)`, where `H^X` covers the
//! `k` source bits and `H^Z` is a fixed lower double diagonal over the `n - k`
//! parity bits. The staircase makes the rank full and the encoder a running
//! XOR. `H^X` is grown with progressive edge growth (PEG).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodeError {
    #[error("invalid code spec: {0}")]
    InvalidSpec(String),
    #[error("infeasible degree profile: {0}")]
    Infeasible(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

/// Parameters of a code: block lengths, degree targets and the correlation
/// the code is designed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub id: String,
    /// Source block length.
    pub k: usize,
    /// Codeword length.
    pub n: usize,
    /// Mean column weight of the systematic part.
    pub dv_target: f64,
    /// Mean check degree reported alongside the design; informational only.
    pub dc_target: f64,
    /// Mean crossover probability the code rate was chosen for.
    pub design_p: f64,
}

impl CodeSpec {
    pub fn new(id: impl Into<String>, k: usize, n: usize, dv_target: f64, design_p: f64) -> Self {
        let mut spec = CodeSpec {
            id: id.into(),
            k,
            n,
            dv_target,
            dc_target: 0.0,
            design_p,
        };
        if n > k {
            spec.dc_target = spec.expected_row_weight();
        }
        spec
    }

    pub fn parity_len(&self) -> usize {
        self.n - self.k
    }

    /// `(n - k) / k`.
    pub fn rate_x(&self) -> f64 {
        crate::encoder::compression_rate(self)
    }

    /// Mean row weight implied by the degree target, staircase included.
    pub fn expected_row_weight(&self) -> f64 {
        let m = (self.n - self.k) as f64;
        (self.dv_target * self.k as f64 + 2.0 * m - 1.0) / m
    }

    pub fn validate(&self) -> Result<(), CodeError> {
        if self.k == 0 || self.n <= self.k {
            return Err(CodeError::InvalidSpec(format!(
                "need 0 < k < n, got k={} n={}",
                self.k, self.n
            )));
        }
        if self.n > u32::MAX as usize {
            return Err(CodeError::InvalidSpec(format!("n={} exceeds u32 range", self.n)));
        }
        if !(self.design_p > 0.0 && self.design_p < 0.5) {
            return Err(CodeError::InvalidSpec(format!(
                "design_p must lie in (0, 0.5), got {}",
                self.design_p
            )));
        }
        if !self.dv_target.is_finite() {
            return Err(CodeError::InvalidSpec("dv_target is not finite".into()));
        }
        Ok(())
    }

    /// Same geometry and degree targets with the source length rescaled to
    /// `k`; the rate is kept as close as an integer `n` allows.
    pub fn scaled(&self, k: usize) -> CodeSpec {
        let parity = ((k as f64) * self.rate_x()).round().max(1.0) as usize;
        CodeSpec {
            id: format!("{}-k{}", self.id, k),
            k,
            n: k + parity,
            dv_target: self.dv_target,
            dc_target: self.dc_target,
            design_p: self.design_p,
        }
    }
}

/// The four full-length designs, with the correlations they are used at.
pub fn table_codes() -> Vec<CodeSpec> {
    let row = |id: &str, n, dv, dc, p| CodeSpec {
        id: id.to_string(),
        k: 16400,
        n,
        dv_target: dv,
        dc_target: dc,
        design_p: p,
    };
    vec![
        row("L1", 26200, 3.0, 8.0, 0.1),
        row("L2", 22400, 3.21, 12.0, 0.05),
        row("L3", 20300, 3.45, 18.0, 0.025),
        row("L4", 19500, 3.0, 19.0, 0.015),
    ]
}

/// Registry of named codes: `L1`..`L4` at full length plus desk-scale
/// variants `L1-k1024`, `L1-k4096`, ... with the same rates.
pub fn registry() -> Vec<CodeSpec> {
    let full = table_codes();
    let mut out = full.clone();
    for k in [1024, 4096] {
        out.extend(full.iter().map(|s| s.scaled(k)));
    }
    out
}

pub fn lookup(id: &str) -> Option<CodeSpec> {
    registry().into_iter().find(|s| s.id == id)
}

/// Sparse binary parity-check matrix with a staircase parity part.
///
/// Rows hold strictly increasing column indices. Columns `0..k` are the
/// systematic part; column `k + i` has ones in rows `i` and `i + 1`, except
/// the last parity column which only touches the last row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseParityMatrix {
    k: usize,
    n_cols: usize,
    rows: Vec<Vec<u32>>,
}

impl fmt::Debug for SparseParityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseParityMatrix")
            .field("k", &self.k)
            .field("n_rows", &self.n_rows())
            .field("n_cols", &self.n_cols)
            .field("ones", &self.num_ones())
            .finish()
    }
}

impl SparseParityMatrix {
    /// Validates and wraps row lists. Rows are taken as given; they must be
    /// strictly increasing.
    pub fn from_rows(k: usize, n_cols: usize, rows: Vec<Vec<u32>>) -> Result<Self, CodeError> {
        let m = rows.len();
        if k == 0 || n_cols <= k || n_cols - k != m {
            return Err(CodeError::InvalidMatrix(format!(
                "shape mismatch: k={k}, n={n_cols}, rows={m}"
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CodeError::InvalidMatrix(format!(
                    "row {i} is not strictly increasing"
                )));
            }
            if row.last().is_some_and(|&c| c as usize >= n_cols) {
                return Err(CodeError::InvalidMatrix(format!(
                    "row {i} has a column >= {n_cols}"
                )));
            }
            let parity: Vec<u32> = row.iter().copied().filter(|&c| c as usize >= k).collect();
            let expected = staircase_row(k, i);
            if parity != expected {
                return Err(CodeError::InvalidMatrix(format!(
                    "row {i} parity columns {parity:?} break the staircase, expected {expected:?}"
                )));
            }
        }
        Ok(SparseParityMatrix { k, n_cols, rows })
    }

    /// Builds a matrix from the systematic part only, appending the staircase.
    pub fn from_systematic_rows(k: usize, systematic: Vec<Vec<u32>>) -> Result<Self, CodeError> {
        let n_cols = k + systematic.len();
        let rows = systematic
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.sort_unstable();
                row.extend(staircase_row(k, i));
                row
            })
            .collect();
        Self::from_rows(k, n_cols, rows)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    /// Systematic entries of row `i` (the prefix with column < k).
    pub fn systematic_row(&self, i: usize) -> &[u32] {
        let row = &self.rows[i];
        let split = row.partition_point(|&c| (c as usize) < self.k);
        &row[..split]
    }

    pub fn num_ones(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Column-major view: for each column, the increasing list of rows.
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (i, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c as usize].push(i as u32);
            }
        }
        cols
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0usize; self.n_cols];
        for row in &self.rows {
            for &c in row {
                w[c as usize] += 1;
            }
        }
        w
    }

    /// Mean column weight over the systematic columns.
    pub fn mean_systematic_column_weight(&self) -> f64 {
        let ones: usize = (0..self.n_rows()).map(|i| self.systematic_row(i).len()).sum();
        ones as f64 / self.k as f64
    }

    /// Mean row weight, staircase included.
    pub fn mean_row_weight(&self) -> f64 {
        self.num_ones() as f64 / self.n_rows() as f64
    }

    /// Returns true if every check is satisfied by `word` (length `n`).
    pub fn syndrome_ok(&self, word: &bitvec::slice::BitSlice<u64>) -> bool {
        debug_assert_eq!(word.len(), self.n_cols);
        self.rows
            .iter()
            .all(|row| row.iter().filter(|&&c| word[c as usize]).count() % 2 == 0)
    }

    /// Rank over GF(2) by dense elimination. Quadratic memory; meant for
    /// small matrices.
    pub fn gf2_rank(&self) -> usize {
        let words = self.n_cols.div_ceil(64);
        let mut dense: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|row| {
                let mut r = vec![0u64; words];
                for &c in row {
                    r[c as usize / 64] |= 1 << (c % 64);
                }
                r
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.n_cols {
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..dense.len()).find(|&r| dense[r][w] & b != 0) else {
                continue;
            };
            dense.swap(rank, pivot);
            let pivot_row = dense[rank].clone();
            for (r, row) in dense.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// True if the systematic subgraph has a 4-cycle (two columns sharing two
    /// rows).
    pub fn has_systematic_4_cycle(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for i in 0..self.n_rows() {
            let row = self.systematic_row(i);
            for (a, &ca) in row.iter().enumerate() {
                for &cb in &row[a + 1..] {
                    if !seen.insert((ca, cb)) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Parity columns of row `i` in a staircase with systematic length `k`.
pub fn staircase_row(k: usize, i: usize) -> Vec<u32> {
    let base = (k + i) as u32;
    if i == 0 {
        vec![base]
    } else {
        vec![base - 1, base]
    }
}

/// Constructs the parity-check matrix for `spec`. Deterministic in
/// `(spec, seed)`.
pub fn build_code(spec: &CodeSpec, seed: u64) -> Result<SparseParityMatrix, CodeError> {
    spec.validate()?;
    let degrees = degree_profile(spec, seed)?;
    let systematic = Peg::new(spec.parity_len(), spec.k, seed).run(&degrees);
    SparseParityMatrix::from_systematic_rows(spec.k, systematic)
}

/// Per-column degrees: a mix of floor(dv) and ceil(dv) matching the mean,
/// with the heavier columns placed at seeded random positions.
fn degree_profile(spec: &CodeSpec, seed: u64) -> Result<Vec<usize>, CodeError> {
    let m = spec.parity_len();
    let dv = spec.dv_target;
    if dv < 1.0 {
        return Err(CodeError::Infeasible(format!(
            "dv_target={dv} is below 1, some source bits would be unchecked"
        )));
    }
    let lo = dv.floor() as usize;
    let hi = dv.ceil() as usize;
    if hi > m {
        return Err(CodeError::Infeasible(format!(
            "column degree {hi} exceeds the {m} available rows (n - k)"
        )));
    }
    let n_hi = if hi == lo {
        0
    } else {
        (((dv - lo as f64) * spec.k as f64).round() as usize).min(spec.k)
    };
    let mut degrees: Vec<usize> = (0..spec.k).map(|i| if i < n_hi { hi } else { lo }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6465_6772_6565_7321);
    degrees.shuffle(&mut rng);
    Ok(degrees)
}

struct Peg {
    m: usize,
    row_adj: Vec<Vec<u32>>,
    col_adj: Vec<Vec<u32>>,
    /// Seeded tie-break priority per row, lower wins.
    priority: Vec<u32>,
    row_mark: Vec<u32>,
    col_mark: Vec<u32>,
    epoch: u32,
}

impl Peg {
    fn new(m: usize, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut priority: Vec<u32> = (0..m as u32).collect();
        priority.shuffle(&mut rng);
        Peg {
            m,
            row_adj: vec![Vec::new(); m],
            col_adj: vec![Vec::new(); k],
            priority,
            row_mark: vec![0; m],
            col_mark: vec![0; k],
            epoch: 0,
        }
    }

    fn run(mut self, degrees: &[usize]) -> Vec<Vec<u32>> {
        let mut candidates = Vec::with_capacity(self.m);
        for (col, &deg) in degrees.iter().enumerate() {
            for _ in 0..deg {
                self.candidates(col, &mut candidates);
                let row = self.pick(&candidates);
                self.row_adj[row].push(col as u32);
                self.col_adj[col].push(row as u32);
            }
        }
        self.row_adj
    }

    fn pick(&self, candidates: &[u32]) -> usize {
        *candidates
            .iter()
            .min_by_key(|&&r| (self.row_adj[r as usize].len(), self.priority[r as usize]))
            .expect("PEG candidate set is never empty while degree <= rows") as usize
    }

    /// Rows farthest from `col` in the current graph: either the rows it
    /// cannot reach at all, or the ones reached last before the breadth-first
    /// expansion covers every row.
    fn candidates(&mut self, col: usize, out: &mut Vec<u32>) {
        out.clear();
        self.epoch += 1;
        let epoch = self.epoch;
        self.col_mark[col] = epoch;
        let mut frontier: Vec<u32> = self.col_adj[col].clone();
        for &r in &frontier {
            self.row_mark[r as usize] = epoch;
        }
        let mut reached = frontier.len();
        if frontier.is_empty() {
            out.extend(0..self.m as u32);
            return;
        }
        let mut next_cols = Vec::new();
        let mut next_rows = Vec::new();
        loop {
            next_cols.clear();
            for &r in &frontier {
                for &c in &self.row_adj[r as usize] {
                    if self.col_mark[c as usize] != epoch {
                        self.col_mark[c as usize] = epoch;
                        next_cols.push(c);
                    }
                }
            }
            next_rows.clear();
            for &c in &next_cols {
                for &r in &self.col_adj[c as usize] {
                    if self.row_mark[r as usize] != epoch {
                        self.row_mark[r as usize] = epoch;
                        next_rows.push(r);
                    }
                }
            }
            if next_rows.is_empty() {
                out.extend((0..self.m as u32).filter(|&r| self.row_mark[r as usize] != epoch));
                if out.is_empty() {
                    // col already touches every row; unreachable when deg <= m
                    out.extend(0..self.m as u32);
                }
                return;
            }
            if reached + next_rows.len() == self.m {
                out.extend_from_slice(&next_rows);
                return;
            }
            reached += next_rows.len();
            std::mem::swap(&mut frontier, &mut next_rows);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_at_size_two() {
        let spec = CodeSpec::new("tiny", 4, 6, 1.0, 0.1);
        let h = build_code(&spec, 0).unwrap();
        let cols = h.columns();
        assert_eq!(cols[4], vec![0, 1]);
        assert_eq!(cols[5], vec![1]);
        assert_eq!(h.gf2_rank(), 2);
    }

    #[test]
    fn single_parity_row() {
        let spec = CodeSpec::new("one", 5, 6, 1.0, 0.2);
        let h = build_code(&spec, 3).unwrap();
        assert_eq!(h.row(0), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn rejects_degree_above_rows() {
        let spec = CodeSpec::new("bad", 100, 103, 3.5, 0.1);
        let err = build_code(&spec, 0).unwrap_err();
        assert!(
            matches!(err, CodeError::Infeasible(ref s) if s.contains("exceeds")),
            "{err}"
        );
        let spec = CodeSpec::new("bad", 100, 150, 0.5, 0.1);
        assert!(matches!(build_code(&spec, 0), Err(CodeError::Infeasible(_))));
    }

    #[test]
    fn rejects_invalid_spec() {
        assert!(CodeSpec::new("x", 10, 10, 3.0, 0.1).validate().is_err());
        assert!(CodeSpec::new("x", 10, 20, 3.0, 0.5).validate().is_err());
        assert!(CodeSpec::new("x", 10, 20, 3.0, 0.0).validate().is_err());
    }

    #[test]
    fn two_valued_degree_profile() {
        let spec = CodeSpec::new("frac", 1000, 1400, 3.21, 0.05);
        let h = build_code(&spec, 9).unwrap();
        let w = h.column_weights();
        assert!(w[..1000].iter().all(|&d| d == 3 || d == 4));
        let fours = w[..1000].iter().filter(|&&d| d == 4).count();
        assert_eq!(fours, 210);
    }

    #[test]
    fn from_rows_rejects_broken_staircase() {
        let rows = vec![vec![0, 2], vec![1, 3]];
        assert!(SparseParityMatrix::from_rows(2, 4, rows).is_err());
        let rows = vec![vec![0, 2], vec![1, 2, 3]];
        assert!(SparseParityMatrix::from_rows(2, 4, rows).is_ok());
        let rows = vec![vec![0, 0, 2], vec![1, 2, 3]];
        assert!(SparseParityMatrix::from_rows(2, 4, rows).is_err());
    }

    #[test]
    fn registry_rates() {
        let l3 = lookup("L3").unwrap();
        assert!((l3.rate_x() - 0.237).abs() < 1e-3);
        let scaled = lookup("L2-k1024").unwrap();
        assert_eq!(scaled.k, 1024);
        assert!((scaled.rate_x() - lookup("L2").unwrap().rate_x()).abs() < 1e-3);
    }
}
