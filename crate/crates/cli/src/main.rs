use anyhow::{anyhow, bail, ensure, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use swldpc::alist::{load_alist, save_alist};
use swldpc::bits::SourceBlock;
use swldpc::bp::{BpConfig, CheckKernel, TannerGraph};
use swldpc::code::{self, build_code, CodeSpec};
use swldpc::encoder::encode;
use swldpc::joint::{JointConfig, JointDecoder, TraceEntry};
use swldpc::source::{generate_frame, CorrelationConfig};
use swldpc::sweep::{emit_report, rate_table, run_sweep, ReportFormat, SweepConfig};
use swldpc::ParityBlock;

mod stream;

use stream::{join_blocks, read_input, split_blocks, ParityHeader, HEADER_LEN};

#[derive(Parser)]
#[command(
    name = "swldpc",
    version,
    about = "Slepian-Wolf compression with staircase LDPC codes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a parity-check matrix and write it as alist.
    Design {
        /// Start from a registry code (L1..L4, L2-k1024, ...); explicit flags override it.
        #[arg(long)]
        code: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Mean column weight of the systematic part.
        #[arg(long)]
        dv: Option<f64>,
        #[arg(long = "design-p")]
        design_p: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compress source blocks to parity blocks.
    Encode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Input is hex text instead of raw bytes.
        #[arg(long)]
        hex: bool,
    },
    /// Reconstruct source blocks from parity and side information.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        parity: PathBuf,
        #[arg(long = "side-info")]
        side_info: PathBuf,
        /// Defaults to the value stored in the alist header.
        #[arg(long = "design-p")]
        design_p: Option<f64>,
        #[arg(long = "max-global", default_value_t = 5)]
        max_global: usize,
        #[arg(long = "max-local", default_value_t = 50)]
        max_local: usize,
        /// Single belief-propagation pass with the design correlation.
        #[arg(long = "no-global-iter")]
        no_global_iter: bool,
        /// Leave the global loop as soon as every check is satisfied.
        #[arg(long = "stop-on-syndrome")]
        stop_on_syndrome: bool,
        #[arg(long, default_value = "sum-product")]
        kernel: CheckKernel,
        /// Write the per-block correlation trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Side information is hex text instead of raw bytes.
        #[arg(long)]
        hex: bool,
    },
    /// Generate correlated source/side-information pairs.
    Simulate {
        #[arg(long)]
        k: usize,
        #[arg(long = "mean-p")]
        mean_p: f64,
        #[arg(long = "delta-p", default_value_t = 0.0)]
        delta_p: f64,
        #[arg(long, default_value_t = 1)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix: writes <prefix>.x, <prefix>.y and <prefix>.json.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a Monte-Carlo sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Report path; `.json` selects JSON, anything else CSV.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the full JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print rates and entropy limits of the code registry as CSV.
    Rates,
}

enum Outcome {
    Ok,
    DecodeFailure,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::DecodeFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Design {
            code,
            k,
            n,
            dv,
            design_p,
            seed,
            output,
        } => {
            let base = match &code {
                Some(id) => Some(code::lookup(id).ok_or_else(|| anyhow!("unknown registry code {id:?}"))?),
                None => None,
            };
            let pick = |v: Option<usize>, b: Option<usize>, name: &str| {
                v.or(b)
                    .ok_or_else(|| anyhow!("--{name} is required without --code"))
            };
            let k = pick(k, base.as_ref().map(|s| s.k), "k")?;
            let n = pick(n, base.as_ref().map(|s| s.n), "n")?;
            let dv = dv.or(base.as_ref().map(|s| s.dv_target)).unwrap_or(3.0);
            let p = design_p
                .or(base.as_ref().map(|s| s.design_p))
                .ok_or_else(|| anyhow!("--design-p is required without --code"))?;
            let id = code.unwrap_or_else(|| format!("k{k}-n{n}"));
            let spec = CodeSpec::new(id, k, n, dv, p);
            let h = build_code(&spec, seed)?;
            save_alist(&output, &h, Some(p)).with_context(|| format!("writing {}", output.display()))?;
            eprintln!(
                "{}: k={} n={} rate={:.4} mean column weight {:.3}, mean row weight {:.3}",
                spec.id,
                h.k(),
                h.n(),
                spec.rate_x(),
                h.mean_systematic_column_weight(),
                h.mean_row_weight()
            );
            Ok(Outcome::Ok)
        }
        Command::Encode {
            code,
            input,
            output,
            hex,
        } => {
            let h = load_alist(&code)
                .with_context(|| format!("loading {}", code.display()))?
                .matrix;
            let blocks = split_blocks(&read_input(&input, hex)?, h.k(), "source")?;
            let parity = blocks
                .into_iter()
                .map(|b| encode(&h, &SourceBlock(b)).map(|z| z.0))
                .collect::<Result<Vec<_>, _>>()?;
            let mut bytes = ParityHeader::for_code(&h).to_bytes().to_vec();
            bytes.extend(join_blocks(&parity));
            std::fs::write(&output, bytes).with_context(|| format!("writing {}", output.display()))?;
            Ok(Outcome::Ok)
        }
        Command::Decode {
            code,
            parity,
            side_info,
            design_p,
            max_global,
            max_local,
            no_global_iter,
            stop_on_syndrome,
            kernel,
            trace,
            output,
            hex,
        } => {
            let file = load_alist(&code).with_context(|| format!("loading {}", code.display()))?;
            let h = file.matrix;
            let design_p = design_p
                .or(file.design_p)
                .ok_or_else(|| anyhow!("no --design-p given and the alist header carries none"))?;
            let raw = std::fs::read(&parity).with_context(|| format!("reading {}", parity.display()))?;
            let header = ParityHeader::parse(&raw)?;
            let expected = ParityHeader::for_code(&h);
            ensure!(
                header == expected,
                "parity stream was produced by a different code (k={}, n={}, id={:08x}; expected k={}, n={}, id={:08x})",
                header.k,
                header.n,
                header.code_id,
                expected.k,
                expected.n,
                expected.code_id
            );
            let zs = split_blocks(&raw[HEADER_LEN..], h.n_rows(), "parity")?;
            let ys = split_blocks(&read_input(&side_info, hex)?, h.k(), "side information")?;
            if zs.len() != ys.len() {
                bail!(
                    "{} parity blocks but {} side-information blocks",
                    zs.len(),
                    ys.len()
                );
            }
            let cfg = JointConfig {
                bp: BpConfig {
                    max_iters: max_local,
                    kernel,
                    ..BpConfig::default()
                },
                max_global,
                stop_on_syndrome,
            };
            let graph = TannerGraph::new(&h);
            let mut dec = JointDecoder::new(&graph, cfg);
            let mut decoded = Vec::with_capacity(zs.len());
            let mut traces = Vec::with_capacity(zs.len());
            let mut all_ok = true;
            for (i, (z, y)) in zs.into_iter().zip(&ys).enumerate() {
                let z = ParityBlock(z);
                let r = if no_global_iter {
                    dec.decode_non_iterative(&z, y, design_p)?
                } else {
                    dec.decode(&z, y, design_p)?
                };
                all_ok &= r.success;
                traces.push(BlockTrace {
                    block: i,
                    success: r.success,
                    global_iters: r.global_iters_used,
                    local_iters: r.local_iters_total,
                    initial_alpha: r.initial_alpha,
                    trace: r.final_state.trace.clone(),
                });
                decoded.push(r.x_hat.0);
            }
            std::fs::write(&output, join_blocks(&decoded))
                .with_context(|| format!("writing {}", output.display()))?;
            if let Some(path) = trace {
                let f =
                    std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
                serde_json::to_writer_pretty(f, &traces)?;
            }
            Ok(if all_ok {
                Outcome::Ok
            } else {
                Outcome::DecodeFailure
            })
        }
        Command::Simulate {
            k,
            mean_p,
            delta_p,
            frames,
            seed,
            output,
        } => {
            ensure!(k > 0, "k must be positive");
            let cfg = CorrelationConfig::new(mean_p, delta_p, seed)?;
            let pairs = (0..frames as u64)
                .map(|i| generate_frame(k, &cfg, i))
                .collect::<Result<Vec<_>, _>>()?;
            let with_ext = |ext: &str| {
                let mut s = output.clone().into_os_string();
                s.push(ext);
                PathBuf::from(s)
            };
            std::fs::write(with_ext(".x"), join_blocks(pairs.iter().map(|p| &p.x)))?;
            std::fs::write(with_ext(".y"), join_blocks(pairs.iter().map(|p| &p.y)))?;
            let sidecar = SimSidecar {
                k,
                mean_p,
                delta_p,
                seed,
                frames,
                actual_p: pairs.iter().map(|p| p.actual_p).collect(),
                flip_fraction: pairs.iter().map(|p| p.flip_fraction()).collect(),
            };
            let f = std::fs::File::create(with_ext(".json"))?;
            serde_json::to_writer_pretty(f, &sidecar)?;
            Ok(Outcome::Ok)
        }
        Command::Sweep {
            config,
            output,
            json,
            threads,
        } => {
            let mut cfg = SweepConfig::from_json_file(&config)
                .with_context(|| format!("reading sweep config {}", config.display()))?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            let out = output
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| anyhow!("no output path: pass -o or set \"output\" in the config"))?;
            let report = run_sweep(&cfg)?;
            emit_report(&report, &out, ReportFormat::from_path(&out))?;
            if let Some(j) = json {
                emit_report(&report, &j, ReportFormat::Json)?;
            }
            for p in &report.points {
                eprintln!(
                    "{} {:?} p={} dp={}: frames={} fer={:.3e} ber={:.3e} global={:.2} local={:.1}",
                    p.code,
                    p.decoder,
                    p.mean_p,
                    p.delta_p,
                    p.frames,
                    p.fer,
                    p.ber,
                    p.mean_global_iters,
                    p.mean_local_iters
                );
            }
            Ok(Outcome::Ok)
        }
        Command::Rates => {
            print!("{}", rate_table(&code::registry()));
            Ok(Outcome::Ok)
        }
    }
}

#[derive(Serialize)]
struct BlockTrace {
    block: usize,
    success: bool,
    global_iters: usize,
    local_iters: usize,
    initial_alpha: f64,
    trace: Vec<TraceEntry>,
}

#[derive(Serialize)]
struct SimSidecar {
    k: usize,
    mean_p: f64,
    delta_p: f64,
    seed: u64,
    frames: usize,
    actual_p: Vec<f64>,
    flip_fraction: Vec<f64>,
}
