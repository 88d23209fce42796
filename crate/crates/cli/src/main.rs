//! `eccmap`: eccentricity maps from image streams.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 selftest failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eccmap::ecc::{EccParams, DEFAULT_ALPHA, DEFAULT_GAMMA, DEFAULT_M};
use eccmap::frameio::SourceFormat;
use eccmap::{FrameDims, MapKind};

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_SELFTEST: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "eccmap", version, about = "Eccentricity maps from image streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn a frame stream into per-frame map images.
    Process(ProcessArgs),
    /// Score predicted masks against ground-truth masks.
    Eval(EvalArgs),
    /// Time map generation without disk writes.
    Bench(BenchArgs),
    /// Run randomized property checks of the core recursion.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
struct EccArgs {
    /// Forgetting factor, in (0, 1).
    #[arg(long, default_value_t = DEFAULT_ALPHA, value_parser = parse_alpha)]
    alpha: f64,
    /// Variance floor in squared intensity units (0-255 scale).
    #[arg(long, default_value_t = DEFAULT_GAMMA, value_parser = parse_gamma)]
    gamma: f64,
    /// Chebyshev multiplier.
    #[arg(long, default_value_t = DEFAULT_M, value_parser = parse_m)]
    m: f64,
    /// Frames with suppressed foreground output [default: ceil(1/alpha)].
    #[arg(long)]
    warmup: Option<u64>,
}

impl EccArgs {
    fn params(&self) -> EccParams {
        let p = EccParams::new(self.alpha, self.gamma, self.m).expect("validated by the parser");
        match self.warmup {
            Some(w) => p.with_warmup(w),
            None => p,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct InputArgs {
    /// Image directory, raw file or .y4m file.
    #[arg(long)]
    input: PathBuf,
    /// Input format: dir, raw or y4m [default: from the path].
    #[arg(long)]
    format: Option<SourceFormat>,
    /// Frame size of raw input as HEIGHTxWIDTHxCHANNELS.
    #[arg(long, value_name = "AxBxC")]
    raw_dims: Option<FrameDims>,
}

#[derive(Debug, Clone, Args)]
struct MapArgs {
    /// Comma-separated maps: e, pos, neg, signed, fg.
    #[arg(long, default_value = "e,pos,neg,signed,fg", value_parser = parse_maps)]
    maps: MapList,
    /// Close the foreground mask with a square of radius R (default 1 when
    /// given without a value).
    #[arg(long, value_name = "R", num_args = 0..=1, default_missing_value = "1")]
    closing: Option<usize>,
    /// Worker threads for the per-pixel sweep [default: available cores].
    #[arg(long)]
    threads: Option<usize>,
}

impl MapArgs {
    fn threads(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Debug, Args)]
struct ProcessArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    ecc: EccArgs,
    #[command(flatten)]
    maps: MapArgs,
    /// Also write ECCM float dumps, one file per map kind.
    #[arg(long)]
    float_dump: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Frames read ahead on the reader thread.
    #[arg(long, default_value_t = 4)]
    prefetch: usize,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Directory of predicted masks.
    pred_dir: PathBuf,
    /// Directory of ground-truth masks.
    truth_dir: PathBuf,
    /// Write a key=value report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Image directory, raw file, .y4m file, or `synthetic:FRAMESxAxBxC`.
    #[arg(long, default_value = "synthetic:633x128x160x3")]
    input: String,
    #[arg(long)]
    format: Option<SourceFormat>,
    #[arg(long, value_name = "AxBxC")]
    raw_dims: Option<FrameDims>,
    #[command(flatten)]
    ecc: EccArgs,
    #[command(flatten)]
    maps: MapArgs,
    /// Timed repetitions; the median is reported.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    repeat: u64,
    /// Seed of the synthetic stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// After timing, write ECCM dumps of the selected maps to --out.
    #[arg(long, requires = "out")]
    float_dump: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a key=value report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Seed for the random sequences [default: fresh].
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random sequences.
    #[arg(long, default_value_t = 1000)]
    sequences: usize,
    /// Negative control: use the plain Euclidean distance in the oracle.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Clone)]
struct MapList(Vec<MapKind>);

fn parse_maps(s: &str) -> Result<MapList, String> {
    let kinds = MapKind::parse_list(s).map_err(|e| e.to_string())?;
    if kinds.is_empty() {
        return Err("at least one map kind is required".into());
    }
    Ok(MapList(kinds))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("alpha must lie strictly between 0 and 1, got {v}"))
    }
}

fn parse_gamma(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("gamma must be finite and >= 0, got {v}"))
    }
}

fn parse_m(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("m must be finite and > 0, got {v}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Process(args) => commands::process(args),
        Command::Eval(args) => commands::eval(args),
        Command::Bench(args) => commands::bench(args),
        Command::Selftest(args) => commands::selftest(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
