//! Monte-Carlo sweeps over codes and correlation points.
//!
//! Frames are independent: frame `f` of point `p` draws its source pair from
//! a seed derived from `(seed, p, f)`. Frames run in parallel in fixed-size
//! batches and are tallied in frame order, so the early stop at the
//! error-frame target lands on the same frame for any worker count.

use crate::alist::{load_alist, AlistError};
use crate::bits::{hamming_distance, SourceBlock};
use crate::bp::{BpConfig, CheckKernel, TannerGraph};
use crate::code::{self, build_code, CodeError, CodeSpec, SparseParityMatrix};
use crate::encoder::encode;
use crate::joint::{JointConfig, JointDecoder};
use crate::source::{binary_entropy, derive_seed, generate_pair_with, CorrelationConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Frames decoded in parallel before the tallies are checked.
const BATCH: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("unknown code id {0:?}")]
    UnknownCode(String),
    #[error("loading {path}: {source}")]
    Alist { path: PathBuf, source: AlistError },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A code named by registry id or read from an alist file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeRef {
    Registry(String),
    Alist {
        alist: PathBuf,
        #[serde(default)]
        id: Option<String>,
        #[serde(default)]
        design_p: Option<f64>,
    },
    Spec(CodeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mean_p: f64,
    #[serde(default)]
    pub delta_p: f64,
}

fn default_frames() -> usize {
    1000
}
fn default_error_frames() -> usize {
    30
}
fn default_ber_target() -> f64 {
    1e-6
}
fn default_max_local() -> usize {
    crate::bp::DEFAULT_MAX_ITERS
}
fn default_max_global() -> usize {
    crate::joint::DEFAULT_MAX_GLOBAL
}
fn default_true() -> bool {
    true
}

fn default_code_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub codes: Vec<CodeRef>,
    pub points: Vec<SweepPoint>,
    /// Frame budget per point.
    #[serde(default = "default_frames")]
    pub frames: usize,
    /// Stop a point once this many frames are in error.
    #[serde(default = "default_error_frames")]
    pub error_frames: usize,
    /// A point counts as error free when its BER is at or below this.
    #[serde(default = "default_ber_target")]
    pub ber_target: f64,
    #[serde(default = "default_max_local")]
    pub max_local: usize,
    #[serde(default = "default_max_global")]
    pub max_global: usize,
    #[serde(default)]
    pub kernel: CheckKernel,
    #[serde(default)]
    pub seed: u64,
    /// Seed for building registry codes.
    #[serde(default = "default_code_seed")]
    pub code_seed: u64,
    /// Also decode every frame with the single-pass decoder.
    #[serde(default)]
    pub compare_non_iterative: bool,
    /// Leave the global loop once a pass satisfies every check. On by
    /// default here; the decoder itself defaults to the plain `alpha` rule.
    #[serde(default = "default_true")]
    pub stop_on_syndrome: bool,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(codes: Vec<CodeRef>, points: Vec<SweepPoint>) -> Self {
        SweepConfig {
            codes,
            points,
            frames: default_frames(),
            error_frames: default_error_frames(),
            ber_target: default_ber_target(),
            max_local: default_max_local(),
            max_global: default_max_global(),
            kernel: CheckKernel::default(),
            seed: 0,
            code_seed: default_code_seed(),
            compare_non_iterative: false,
            stop_on_syndrome: true,
            threads: None,
            output: None,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.codes.is_empty() {
            return Err(SweepError::Config("no codes given".into()));
        }
        if self.points.is_empty() {
            return Err(SweepError::Config("no sweep points given".into()));
        }
        if self.max_local == 0 || self.max_global == 0 {
            return Err(SweepError::Config("iteration caps must be >= 1".into()));
        }
        if self.error_frames == 0 {
            return Err(SweepError::Config("error-frame target must be >= 1".into()));
        }
        if self.threads == Some(0) {
            return Err(SweepError::Config("threads must be >= 1".into()));
        }
        for pt in &self.points {
            CorrelationConfig::new(pt.mean_p, pt.delta_p, 0)
                .map_err(|e| SweepError::Config(e.to_string()))?;
        }
        Ok(())
    }

    fn joint_config(&self) -> JointConfig {
        JointConfig {
            bp: BpConfig {
                max_iters: self.max_local,
                kernel: self.kernel,
                ..BpConfig::default()
            },
            max_global: self.max_global,
            stop_on_syndrome: self.stop_on_syndrome,
        }
    }
}

/// A loaded code ready for simulation.
#[derive(Debug, Clone)]
pub struct LoadedCode {
    pub id: String,
    pub matrix: SparseParityMatrix,
    pub design_p: Option<f64>,
}

pub fn load_code(r: &CodeRef, code_seed: u64) -> Result<LoadedCode, SweepError> {
    match r {
        CodeRef::Registry(id) => {
            let spec = code::lookup(id).ok_or_else(|| SweepError::UnknownCode(id.clone()))?;
            Ok(LoadedCode {
                id: id.clone(),
                matrix: build_code(&spec, code_seed)?,
                design_p: Some(spec.design_p),
            })
        }
        CodeRef::Spec(spec) => Ok(LoadedCode {
            id: spec.id.clone(),
            matrix: build_code(spec, code_seed)?,
            design_p: Some(spec.design_p),
        }),
        CodeRef::Alist { alist, id, design_p } => {
            let file = load_alist(alist).map_err(|source| SweepError::Alist {
                path: alist.clone(),
                source,
            })?;
            Ok(LoadedCode {
                id: id.clone().unwrap_or_else(|| alist.display().to_string()),
                matrix: file.matrix,
                design_p: design_p.or(file.design_p),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSummary {
    pub id: String,
    pub k: usize,
    pub n: usize,
    pub rate_x: f64,
    /// `R = R_X + R_Y` with `R_Y = 1`.
    pub total_rate: f64,
    pub design_p: Option<f64>,
    /// `1 + H(design_p)`.
    pub joint_entropy_limit: Option<f64>,
    pub mean_systematic_column_weight: f64,
    pub mean_row_weight: f64,
}

impl CodeSummary {
    pub fn of(code: &LoadedCode) -> Self {
        let h = &code.matrix;
        let rate_x = (h.n() - h.k()) as f64 / h.k() as f64;
        CodeSummary {
            id: code.id.clone(),
            k: h.k(),
            n: h.n(),
            rate_x,
            total_rate: 1.0 + rate_x,
            design_p: code.design_p,
            joint_entropy_limit: code.design_p.map(|p| 1.0 + binary_entropy(p)),
            mean_systematic_column_weight: h.mean_systematic_column_weight(),
            mean_row_weight: h.mean_row_weight(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Iterative,
    NonIterative,
}

/// Frames where exactly one of the two decoders failed. Only present on
/// iterative rows of sweeps run with `compare_non_iterative`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedCounts {
    /// Iterative correct, single-pass in error.
    pub iterative_only_correct: usize,
    /// Single-pass correct, iterative in error.
    pub non_iterative_only_correct: usize,
    /// One-sided sign-test p-value for "iterative is better".
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub code: String,
    pub decoder: DecoderKind,
    pub mean_p: f64,
    pub delta_p: f64,
    /// `1 + H(mean_p)`.
    pub joint_entropy: f64,
    /// `1 + H(average realized crossover probability)`.
    pub joint_entropy_realized: f64,
    pub frames: usize,
    pub bit_errs: usize,
    pub frame_errs: usize,
    /// Frames whose final pass did not satisfy every check.
    pub decode_failures: usize,
    pub ber: f64,
    pub fer: f64,
    pub mean_global_iters: f64,
    pub mean_local_iters: f64,
    pub error_target_reached: bool,
    pub meets_ber_target: bool,
    pub seconds: f64,
    #[serde(default)]
    pub paired: Option<PairedCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub codes: Vec<CodeSummary>,
    pub points: Vec<PointReport>,
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameOutcome {
    bit_errs: usize,
    syndrome_ok: bool,
    global: usize,
    local: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    frames: usize,
    bit_errs: usize,
    frame_errs: usize,
    failures: usize,
    global: usize,
    local: usize,
}

impl Tally {
    fn add(&mut self, o: &FrameOutcome) {
        self.frames += 1;
        self.bit_errs += o.bit_errs;
        self.frame_errs += usize::from(o.bit_errs > 0);
        self.failures += usize::from(!o.syndrome_ok);
        self.global += o.global;
        self.local += o.local;
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport, SweepError> {
    cfg.validate()?;
    let codes = cfg
        .codes
        .iter()
        .map(|r| load_code(r, cfg.code_seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| SweepError::Config(format!("thread pool: {e}")))?;
    let mut report = SweepReport {
        codes: codes.iter().map(CodeSummary::of).collect(),
        points: Vec::new(),
    };
    if cfg.frames == 0 {
        return Ok(report);
    }
    let mut stream = 0u64;
    for code in &codes {
        let graph = TannerGraph::new(&code.matrix);
        for pt in &cfg.points {
            stream += 1;
            let rows = pool.install(|| run_point(cfg, code, &graph, pt, stream));
            report.points.extend(rows);
        }
    }
    Ok(report)
}

fn run_point(
    cfg: &SweepConfig,
    code: &LoadedCode,
    graph: &TannerGraph,
    pt: &SweepPoint,
    stream: u64,
) -> Vec<PointReport> {
    let start = Instant::now();
    let h = &code.matrix;
    let k = h.k();
    let jcfg = cfg.joint_config();
    let compare = cfg.compare_non_iterative;

    let mut iter = Tally::default();
    let mut single = Tally::default();
    let mut actual_p_sum = 0.0;
    let (mut only_iter, mut only_single) = (0usize, 0usize);

    let done = |t: &Tally, s: &Tally| {
        t.frame_errs >= cfg.error_frames && (!compare || s.frame_errs >= cfg.error_frames)
    };

    let mut next = 0;
    'outer: while next < cfg.frames {
        let end = (next + BATCH).min(cfg.frames);
        let batch: Vec<(f64, FrameOutcome, Option<FrameOutcome>)> = (next..end)
            .into_par_iter()
            .map_init(
                || JointDecoder::new(graph, jcfg.clone()),
                |dec, f| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream, f as u64));
                    let pair = generate_pair_with(k, pt.mean_p, pt.delta_p, &mut rng);
                    let x = SourceBlock(pair.x);
                    let z = encode(h, &x).expect("frame length matches code");
                    let mut outcome = |iterative: bool| {
                        let r = if iterative {
                            dec.decode(&z, &pair.y, pt.mean_p)
                        } else {
                            dec.decode_non_iterative(&z, &pair.y, pt.mean_p)
                        }
                        .expect("validated sweep inputs");
                        FrameOutcome {
                            bit_errs: hamming_distance(&r.x_hat.0, &x.0),
                            syndrome_ok: r.success,
                            global: r.global_iters_used,
                            local: r.local_iters_total,
                        }
                    };
                    let a = outcome(true);
                    let b = compare.then(|| outcome(false));
                    (pair.actual_p, a, b)
                },
            )
            .collect();
        for (p, a, b) in batch {
            actual_p_sum += p;
            iter.add(&a);
            if let Some(b) = b {
                single.add(&b);
                match (a.bit_errs == 0, b.bit_errs == 0) {
                    (true, false) => only_iter += 1,
                    (false, true) => only_single += 1,
                    _ => {}
                }
            }
            if done(&iter, &single) {
                break 'outer;
            }
        }
        next = end;
    }
    let seconds = start.elapsed().as_secs_f64();

    let realized = actual_p_sum / iter.frames as f64;
    let row = |kind: DecoderKind, t: &Tally, paired: Option<PairedCounts>| {
        let ber = t.bit_errs as f64 / (t.frames * k) as f64;
        PointReport {
            code: code.id.clone(),
            decoder: kind,
            mean_p: pt.mean_p,
            delta_p: pt.delta_p,
            joint_entropy: 1.0 + binary_entropy(pt.mean_p),
            joint_entropy_realized: 1.0 + binary_entropy(realized),
            frames: t.frames,
            bit_errs: t.bit_errs,
            frame_errs: t.frame_errs,
            decode_failures: t.failures,
            ber,
            fer: t.frame_errs as f64 / t.frames as f64,
            mean_global_iters: t.global as f64 / t.frames as f64,
            mean_local_iters: t.local as f64 / t.frames as f64,
            error_target_reached: t.frame_errs >= cfg.error_frames,
            meets_ber_target: ber <= cfg.ber_target,
            seconds,
            paired,
        }
    };
    let mut rows = Vec::new();
    let paired = compare.then(|| PairedCounts {
        iterative_only_correct: only_iter,
        non_iterative_only_correct: only_single,
        p_value: sign_test_p_value(only_iter, only_single),
    });
    rows.push(row(DecoderKind::Iterative, &iter, paired));
    if compare {
        rows.push(row(DecoderKind::NonIterative, &single, None));
    }
    rows
}

/// One-sided exact sign test: probability of at least `wins` successes in
/// `wins + losses` fair coin flips.
pub fn sign_test_p_value(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    // log-space binomial pmf at p = 1/2
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let ln_n = ln_fact(n);
    let ln_half_n = n as f64 * 0.5f64.ln();
    (wins..=n)
        .map(|i| (ln_n - ln_fact(i) - ln_fact(n - i) + ln_half_n).exp())
        .sum::<f64>()
        .min(1.0)
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    code: &'a str,
    mean_p: f64,
    delta_p: f64,
    joint_entropy: f64,
    frames: usize,
    bit_errs: usize,
    frame_errs: usize,
    ber: f64,
    fer: f64,
    mean_global_iters: f64,
    mean_local_iters: f64,
    decoder: DecoderKind,
    joint_entropy_realized: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// Picks the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

/// CSV with one row per point and decoder. Wall-clock time is left to the
/// JSON form so identical configs give identical bytes.
pub fn write_csv<W: std::io::Write>(r: &SweepReport, w: W) -> Result<(), SweepError> {
    let mut out = csv::Writer::from_writer(w);
    for p in &r.points {
        out.serialize(CsvRow {
            code: &p.code,
            mean_p: p.mean_p,
            delta_p: p.delta_p,
            joint_entropy: p.joint_entropy,
            frames: p.frames,
            bit_errs: p.bit_errs,
            frame_errs: p.frame_errs,
            ber: p.ber,
            fer: p.fer,
            mean_global_iters: p.mean_global_iters,
            mean_local_iters: p.mean_local_iters,
            decoder: p.decoder,
            joint_entropy_realized: p.joint_entropy_realized,
        })?;
    }
    if r.points.is_empty() {
        out.write_record([
            "code",
            "mean_p",
            "delta_p",
            "joint_entropy",
            "frames",
            "bit_errs",
            "frame_errs",
            "ber",
            "fer",
            "mean_global_iters",
            "mean_local_iters",
            "decoder",
            "joint_entropy_realized",
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_csv_string(r: &SweepReport) -> String {
    let mut buf = Vec::new();
    write_csv(r, &mut buf).expect("in-memory CSV");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

pub fn emit_report(r: &SweepReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<(), SweepError> {
    let f = std::fs::File::create(path)?;
    let w = std::io::BufWriter::new(f);
    match format {
        ReportFormat::Csv => write_csv(r, w),
        ReportFormat::Json => Ok(serde_json::to_writer_pretty(w, r)?),
    }
}

/// Rate summary of a set of code specs: id, k, n, rate, total rate and
/// joint-entropy limit at the design correlation.
pub fn rate_table(specs: &[CodeSpec]) -> String {
    let mut s = String::from("code,k,n,rate_x,total_rate,design_p,joint_entropy_limit\n");
    for c in specs {
        let r = c.rate_x();
        s.push_str(&format!(
            "{},{},{},{:.4},{:.4},{},{:.4}\n",
            c.id,
            c.k,
            c.n,
            r,
            1.0 + r,
            c.design_p,
            1.0 + binary_entropy(c.design_p)
        ));
    }
    s
}
