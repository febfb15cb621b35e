//! Two-stage decoding with correlation re-estimation.
//!
//! Each global iteration runs belief propagation with the current
//! correlation log-odds `alpha`, then re-estimates `alpha` from the number of
//! positions where the decoded source and the side information differ. The
//! loop stops once `alpha` moves by less than [`ALPHA_TOLERANCE`] or the
//! global iteration cap is reached.

use crate::bits::{hamming_distance, Bits, ParityBlock, SourceBlock};
use crate::bp::{init_from_side_info, BpConfig, BpDecoder, TannerGraph};
use crate::LengthMismatch;
use bitvec::slice::BitSlice;
use serde::{Deserialize, Serialize};

/// Global iterations continue while `|alpha_i - alpha_{i-1}| >= ALPHA_TOLERANCE`.
pub const ALPHA_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_MAX_GLOBAL: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JointError {
    #[error(transparent)]
    Length(#[from] LengthMismatch),
    #[error("design correlation must lie in (0, 0.5), got {0}")]
    DesignP(f64),
    #[error("global iteration cap must be at least 1")]
    ZeroCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Global iteration index, starting at 1.
    pub iteration: usize,
    pub alpha: f64,
    pub p_hat: f64,
    pub syndrome_ok: bool,
    pub local_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationState {
    pub alpha: f64,
    pub p_hat: f64,
    /// Number of positions where the estimate and the side information
    /// differ, after clamping to `[1, k - 1]`.
    pub flips: usize,
    pub trace: Vec<TraceEntry>,
}

/// Log-odds of the design correlation, the starting point of the loop.
pub fn initial_alpha(design_p: f64) -> Result<f64, JointError> {
    if !(design_p > 0.0 && design_p < 0.5) {
        return Err(JointError::DesignP(design_p));
    }
    Ok((design_p / (1.0 - design_p)).ln())
}

/// Estimates the correlation from the disagreement between `x_hat` and `y`.
///
/// The count is clamped to `[1, k - 1]` so the log-odds stays finite.
pub fn estimate_alpha(x_hat: &BitSlice<u64>, y: &BitSlice<u64>) -> Result<CorrelationState, LengthMismatch> {
    LengthMismatch::check("side information", x_hat.len(), y.len())?;
    let k = x_hat.len();
    Ok(alpha_from_weight(hamming_distance(x_hat, y), k))
}

/// `p_hat = w / k`, `alpha = ln(w / (k - w))` with `w` clamped to `[1, k - 1]`.
/// Requires `k >= 2`.
///
/// The log-odds is evaluated as `ln w - ln(k - w)`, so `alpha(w) = -alpha(k - w)`
/// holds exactly.
pub fn alpha_from_weight(w: usize, k: usize) -> CorrelationState {
    assert!(k >= 2, "correlation estimate needs k >= 2");
    let w = w.clamp(1, k - 1);
    CorrelationState {
        alpha: (w as f64).ln() - ((k - w) as f64).ln(),
        p_hat: w as f64 / k as f64,
        flips: w,
        trace: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    pub bp: BpConfig,
    /// Global iteration cap.
    pub max_global: usize,
    /// Also leave the global loop as soon as a pass satisfies every check.
    /// Off by default: the plain rule only looks at the change in `alpha`.
    pub stop_on_syndrome: bool,
}

impl Default for JointConfig {
    fn default() -> Self {
        JointConfig {
            bp: BpConfig::default(),
            max_global: DEFAULT_MAX_GLOBAL,
            stop_on_syndrome: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDecodeResult {
    pub x_hat: SourceBlock,
    pub success: bool,
    pub global_iters_used: usize,
    pub local_iters_total: usize,
    /// `alpha` used by the first pass.
    pub initial_alpha: f64,
    pub final_state: CorrelationState,
}

/// Joint decoder bound to one Tanner graph. Holds mutable scratch, so use
/// one per thread.
pub struct JointDecoder<'g> {
    bp: BpDecoder<'g>,
    cfg: JointConfig,
}

impl<'g> JointDecoder<'g> {
    pub fn new(graph: &'g TannerGraph, cfg: JointConfig) -> Self {
        JointDecoder {
            bp: BpDecoder::new(graph, cfg.bp.clone()),
            cfg,
        }
    }

    pub fn config(&self) -> &JointConfig {
        &self.cfg
    }

    /// Iterative decode: BP, re-estimate `alpha`, repeat.
    pub fn decode(
        &mut self,
        z: &ParityBlock,
        y: &BitSlice<u64>,
        design_p: f64,
    ) -> Result<JointDecodeResult, JointError> {
        self.run(z, y, design_p, true)
    }

    /// Single BP pass using only the design correlation.
    pub fn decode_non_iterative(
        &mut self,
        z: &ParityBlock,
        y: &BitSlice<u64>,
        design_p: f64,
    ) -> Result<JointDecodeResult, JointError> {
        self.run(z, y, design_p, false)
    }

    fn run(
        &mut self,
        z: &ParityBlock,
        y: &BitSlice<u64>,
        design_p: f64,
        iterate: bool,
    ) -> Result<JointDecodeResult, JointError> {
        let g = self.bp.graph();
        let k = g.k();
        LengthMismatch::check("side information", k, y.len())?;
        LengthMismatch::check("parity block", g.n_rows(), z.len())?;
        if self.cfg.max_global == 0 {
            return Err(JointError::ZeroCap);
        }
        let alpha0 = initial_alpha(design_p)?;
        let cap = if iterate { self.cfg.max_global } else { 1 };
        let (q, s_max) = (self.cfg.bp.q, self.cfg.bp.s_max);

        let mut alpha = alpha0;
        let mut trace = Vec::new();
        let mut local_total = 0;
        let mut x_hat = Bits::new();
        let mut success = false;
        let mut state = CorrelationState {
            alpha: alpha0,
            p_hat: design_p,
            flips: 0,
            trace: Vec::new(),
        };
        for i in 1..=cap {
            let init = init_from_side_info(y, z, alpha, q, s_max);
            let out = self.bp.decode(&init)?;
            local_total += out.iterations_used;
            success = out.syndrome_ok;
            x_hat = out.systematic(k);
            if !iterate {
                trace.push(TraceEntry {
                    iteration: i,
                    alpha,
                    p_hat: design_p,
                    syndrome_ok: success,
                    local_iters: out.iterations_used,
                });
                break;
            }
            state = estimate_alpha(&x_hat, y)?;
            trace.push(TraceEntry {
                iteration: i,
                alpha: state.alpha,
                p_hat: state.p_hat,
                syndrome_ok: success,
                local_iters: out.iterations_used,
            });
            let delta = (state.alpha - alpha).abs();
            alpha = state.alpha;
            if delta < ALPHA_TOLERANCE || (self.cfg.stop_on_syndrome && success) {
                break;
            }
        }
        state.trace = trace;
        Ok(JointDecodeResult {
            x_hat: SourceBlock(x_hat),
            success,
            global_iters_used: state.trace.len(),
            local_iters_total: local_total,
            initial_alpha: alpha0,
            final_state: state,
        })
    }
}
