//! Belief propagation over quantized integer LLRs.
//!
//! Real LLRs are mapped to integers as `floor(2^q * l + 0.5)` and every
//! message saturates at `s_max`. Parity bits arrive over a perfect channel and
//! start pinned at `±s_max`. Positive values mean bit 1.
//!
//! Decoding uses a flooding schedule. Two check-node kernels are available:
//! sum-product with box-plus evaluated through an integer correction table,
//! and plain min-sum.

use crate::bits::{Bits, ParityBlock};
use crate::code::SparseParityMatrix;
use crate::LengthMismatch;
use bitvec::slice::BitSlice;
use serde::{Deserialize, Serialize};

/// Precision exponent of the quantizer.
pub const DEFAULT_Q: u32 = 3;
/// Largest integer metric handled by the decoder.
pub const DEFAULT_S_MAX: i32 = 10_000;
/// Local iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKernel {
    /// Box-plus with a table-driven `ln(1 + e^-x)` correction.
    #[default]
    SumProduct,
    MinSum,
}

impl std::str::FromStr for CheckKernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum-product" | "sp" => Ok(CheckKernel::SumProduct),
            "min-sum" | "ms" => Ok(CheckKernel::MinSum),
            _ => Err(format!("unknown check kernel {s:?} (sum-product | min-sum)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub q: u32,
    pub s_max: i32,
    pub max_iters: usize,
    pub kernel: CheckKernel,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            q: DEFAULT_Q,
            s_max: DEFAULT_S_MAX,
            max_iters: DEFAULT_MAX_ITERS,
            kernel: CheckKernel::SumProduct,
        }
    }
}

/// `floor(2^q * l + 0.5)` clipped to `[-s_max, s_max]`.
pub fn quantize_llr(l: f64, q: u32, s_max: i32) -> i32 {
    let scaled = l * f64::from(1u32 << q);
    if !(scaled.abs() < 1e15) {
        // also catches NaN, which is mapped to 0
        return if scaled > 0.0 {
            s_max
        } else if scaled < 0.0 {
            -s_max
        } else {
            0
        };
    }
    // floor(x + 0.5) computed without the rounding error of the addition
    let base = scaled.floor();
    let frac = scaled - base;
    let v = base as i64 + i64::from(frac >= 0.5);
    v.clamp(-(s_max as i64), s_max as i64) as i32
}

/// Quantized LLR of a parity bit received over the perfect channel.
pub fn parity_llrq(z: bool, s_max: i32) -> i32 {
    if z {
        s_max
    } else {
        -s_max
    }
}

/// Per-bit quantized LLRs over a whole codeword.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlrqVector {
    pub values: Vec<i32>,
    pub q: u32,
    pub s_max: i32,
}

impl LlrqVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn hard_decisions(&self) -> Bits {
        self.values.iter().map(|&v| v > 0).collect()
    }

    /// Saturated LLRs for a known codeword.
    pub fn from_codeword(word: &BitSlice<u64>, s_max: i32) -> Self {
        LlrqVector {
            values: word.iter().map(|b| parity_llrq(*b, s_max)).collect(),
            q: DEFAULT_Q,
            s_max,
        }
    }
}

/// Initial LLRs from side information `y`, received parity `z` and the
/// correlation log-odds `alpha = ln(p / (1 - p))`.
///
/// A systematic bit gets `(2 y_j - 1) * (-alpha)`: for `p < 0.5` the side
/// information bit is the favoured value, with magnitude `|alpha|`.
pub fn init_from_side_info(y: &BitSlice<u64>, z: &ParityBlock, alpha: f64, q: u32, s_max: i32) -> LlrqVector {
    let one = quantize_llr(-alpha, q, s_max);
    let zero = quantize_llr(alpha, q, s_max);
    let mut values = Vec::with_capacity(y.len() + z.len());
    values.extend(y.iter().map(|b| if *b { one } else { zero }));
    values.extend(z.0.iter().map(|b| parity_llrq(*b, s_max)));
    LlrqVector { values, q, s_max }
}

/// Like [`init_from_side_info`] with length checks against `h`.
pub fn init_checked(
    h: &SparseParityMatrix,
    y: &BitSlice<u64>,
    z: &ParityBlock,
    alpha: f64,
    cfg: &BpConfig,
) -> Result<LlrqVector, LengthMismatch> {
    LengthMismatch::check("side information", h.k(), y.len())?;
    LengthMismatch::check("parity block", h.n_rows(), z.len())?;
    Ok(init_from_side_info(y, z, alpha, cfg.q, cfg.s_max))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub hard_bits: Bits,
    pub posterior: LlrqVector,
    /// Message-passing rounds performed; 0 if the input already satisfied
    /// every check.
    pub iterations_used: usize,
    pub syndrome_ok: bool,
}

impl DecodeOutcome {
    /// Decoded systematic bits.
    pub fn systematic(&self, k: usize) -> Bits {
        self.hard_bits[..k].to_bitvec()
    }
}

/// Edge layout of a parity-check matrix: edges are numbered row by row,
/// with a column-major index on the side.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    n: usize,
    k: usize,
    row_start: Vec<u32>,
    edge_col: Vec<u32>,
    col_start: Vec<u32>,
    col_edges: Vec<u32>,
}

impl TannerGraph {
    pub fn new(h: &SparseParityMatrix) -> Self {
        let n = h.n();
        let mut row_start = Vec::with_capacity(h.n_rows() + 1);
        let mut edge_col = Vec::with_capacity(h.num_ones());
        row_start.push(0);
        for row in h.rows() {
            edge_col.extend_from_slice(row);
            row_start.push(edge_col.len() as u32);
        }
        let mut col_start = vec![0u32; n + 1];
        for &c in &edge_col {
            col_start[c as usize + 1] += 1;
        }
        for c in 0..n {
            col_start[c + 1] += col_start[c];
        }
        let mut fill = col_start.clone();
        let mut col_edges = vec![0u32; edge_col.len()];
        for (e, &c) in edge_col.iter().enumerate() {
            col_edges[fill[c as usize] as usize] = e as u32;
            fill[c as usize] += 1;
        }
        TannerGraph {
            n,
            k: h.k(),
            row_start,
            edge_col,
            col_start,
            col_edges,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_rows(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edge_col.len()
    }

    fn row_edges(&self, r: usize) -> std::ops::Range<usize> {
        self.row_start[r] as usize..self.row_start[r + 1] as usize
    }

    fn col_edge_ids(&self, c: usize) -> &[u32] {
        &self.col_edges[self.col_start[c] as usize..self.col_start[c + 1] as usize]
    }

    fn syndrome_ok(&self, hard: &[bool]) -> bool {
        (0..self.n_rows()).all(|r| {
            !self
                .row_edges(r)
                .fold(false, |acc, e| acc ^ hard[self.edge_col[e] as usize])
        })
    }
}

/// Integer box-plus for LLRs where positive means 1: the LLR of `u xor v` is
/// `-sign(a) sign(b) (min(|a|, |b|) + f(|a| + |b|) - f(||a| - |b||))` with
/// `f(x) = ln(1 + e^-x)` read from a table in quantized units.
#[derive(Debug, Clone)]
struct BoxPlus {
    table: Vec<i32>,
}

impl BoxPlus {
    fn new(q: u32) -> Self {
        let scale = f64::from(1u32 << q);
        let len = 8 * (1usize << q);
        let table = (0..len)
            .map(|d| {
                let x = d as f64 / scale;
                (scale * (-x).exp().ln_1p()).round() as i32
            })
            .collect();
        BoxPlus { table }
    }

    #[inline]
    fn correction(&self, d: i32) -> i32 {
        self.table.get(d as usize).copied().unwrap_or(0)
    }

    #[inline]
    fn apply(&self, a: i32, b: i32) -> i32 {
        let (ma, mb) = (a.abs(), b.abs());
        let mag = (ma.min(mb) + self.correction(ma + mb) - self.correction((ma - mb).abs())).max(0);
        if (a < 0) != (b < 0) {
            mag
        } else {
            -mag
        }
    }
}

/// Reusable decoder state for one Tanner graph. One instance per thread.
#[derive(Debug, Clone)]
pub struct BpDecoder<'g> {
    graph: &'g TannerGraph,
    cfg: BpConfig,
    boxplus: BoxPlus,
    v2c: Vec<i32>,
    c2v: Vec<i32>,
    posterior: Vec<i32>,
    hard: Vec<bool>,
    fwd: Vec<i32>,
}

impl<'g> BpDecoder<'g> {
    pub fn new(graph: &'g TannerGraph, cfg: BpConfig) -> Self {
        let e = graph.num_edges();
        BpDecoder {
            graph,
            boxplus: BoxPlus::new(cfg.q),
            cfg,
            v2c: vec![0; e],
            c2v: vec![0; e],
            posterior: vec![0; graph.n],
            hard: vec![false; graph.n],
            fwd: Vec::new(),
        }
    }

    pub fn config(&self) -> &BpConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &TannerGraph {
        self.graph
    }

    pub fn decode(&mut self, init: &LlrqVector) -> Result<DecodeOutcome, LengthMismatch> {
        let g = self.graph;
        LengthMismatch::check("initial LLR vector", g.n, init.len())?;
        let s = self.cfg.s_max;
        for (p, &v) in self.posterior.iter_mut().zip(&init.values) {
            *p = v.clamp(-s, s);
        }
        for (e, &c) in g.edge_col.iter().enumerate() {
            self.v2c[e] = self.posterior[c as usize];
        }
        let mut ok = self.hard_decide();
        let mut iters = 0;
        while !ok && iters < self.cfg.max_iters {
            self.check_update();
            self.bit_update(&init.values);
            iters += 1;
            ok = self.hard_decide();
        }
        Ok(DecodeOutcome {
            hard_bits: self.hard.iter().copied().collect(),
            posterior: LlrqVector {
                values: self.posterior.clone(),
                q: self.cfg.q,
                s_max: s,
            },
            iterations_used: iters,
            syndrome_ok: ok,
        })
    }

    fn hard_decide(&mut self) -> bool {
        for (h, &p) in self.hard.iter_mut().zip(&self.posterior) {
            *h = p > 0;
        }
        self.graph.syndrome_ok(&self.hard)
    }

    fn check_update(&mut self) {
        let g = self.graph;
        for r in 0..g.n_rows() {
            let edges = g.row_edges(r);
            match self.cfg.kernel {
                CheckKernel::MinSum => min_sum_row(&self.v2c[edges.clone()], &mut self.c2v[edges]),
                CheckKernel::SumProduct => sum_product_row(
                    &self.boxplus,
                    &self.v2c[edges.clone()],
                    &mut self.c2v[edges],
                    &mut self.fwd,
                ),
            }
        }
        debug_assert!(self.c2v.iter().all(|m| m.abs() <= self.cfg.s_max));
    }

    fn bit_update(&mut self, channel: &[i32]) {
        let g = self.graph;
        let s = self.cfg.s_max;
        for c in 0..g.n {
            let edges = g.col_edge_ids(c);
            let total: i32 =
                channel[c].clamp(-s, s) + edges.iter().map(|&e| self.c2v[e as usize]).sum::<i32>();
            self.posterior[c] = total.clamp(-s, s);
            for &e in edges {
                self.v2c[e as usize] = (total - self.c2v[e as usize]).clamp(-s, s);
            }
        }
        debug_assert!(self.v2c.iter().all(|m| m.abs() <= s));
    }
}

fn min_sum_row(input: &[i32], out: &mut [i32]) {
    // the xor of d - 1 bits picks up one sign flip per combination
    let mut negative = input.len() % 2 == 1;
    let (mut min1, mut min2, mut at) = (i32::MAX, i32::MAX, 0);
    for (i, &m) in input.iter().enumerate() {
        negative ^= m < 0;
        let a = m.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            at = i;
        } else if a < min2 {
            min2 = a;
        }
    }
    for (i, (o, &m)) in out.iter_mut().zip(input).enumerate() {
        let mag = if i == at { min2 } else { min1 };
        let mag = if mag == i32::MAX { 0 } else { mag };
        *o = if negative ^ (m < 0) { -mag } else { mag };
    }
}

/// Extrinsic box-plus of every input via forward/backward partial sums.
fn sum_product_row(bp: &BoxPlus, input: &[i32], out: &mut [i32], fwd: &mut Vec<i32>) {
    let d = input.len();
    match d {
        0 => return,
        1 => {
            // a lone edge has no extrinsic information
            out[0] = 0;
            return;
        }
        _ => {}
    }
    fwd.clear();
    fwd.push(input[0]);
    for i in 1..d - 1 {
        let prev = fwd[i - 1];
        fwd.push(bp.apply(prev, input[i]));
    }
    let mut bwd = input[d - 1];
    out[d - 1] = fwd[d - 2];
    for i in (1..d - 1).rev() {
        out[i] = bp.apply(fwd[i - 1], bwd);
        bwd = bp.apply(bwd, input[i]);
    }
    out[0] = bwd;
}

/// One-shot decode that builds the Tanner graph on the fly.
pub fn bp_decode(
    h: &SparseParityMatrix,
    init: &LlrqVector,
    cfg: &BpConfig,
) -> Result<DecodeOutcome, LengthMismatch> {
    let g = TannerGraph::new(h);
    BpDecoder::new(&g, cfg.clone()).decode(init)
}
