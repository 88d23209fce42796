use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use eccmap::engine::Pipeline;
use eccmap::eval::{benchmark_frames, evaluate_dirs, BenchConfig};
use eccmap::frameio::{open_source, write_map_image, write_record, FrameSource};
use eccmap::selftest::{run_selftest, Fault, SelftestConfig};
use eccmap::synth::moving_square_stream;
use eccmap::{EccParams, Frame, FrameDims, MapBundle, MapKind};

use crate::{BenchArgs, EvalArgs, ProcessArgs, SelftestArgs, EXIT_SELFTEST};

const SYNTHETIC_PREFIX: &str = "synthetic:";
const SYNTHETIC_NOISE: u8 = 4;

/// One `.eccm` file per selected map kind.
struct DumpSet {
    writers: Vec<(MapKind, PathBuf, BufWriter<File>)>,
}

impl DumpSet {
    fn create(out: &Path, kinds: &[MapKind]) -> Result<Self> {
        let mut writers = Vec::with_capacity(kinds.len());
        for &kind in kinds {
            let path = out.join(format!("{}.eccm", kind.as_str()));
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            writers.push((kind, path, BufWriter::new(file)));
        }
        Ok(Self { writers })
    }

    fn write(&mut self, frame_index: u64, bundle: &MapBundle) -> Result<()> {
        for (kind, path, w) in &mut self.writers {
            write_record(w, frame_index, &bundle.map_values(*kind))
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        for (_, path, mut w) in self.writers {
            w.flush().with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn closing_radius(maps: &[MapKind], closing: Option<usize>) -> usize {
    if maps.contains(&MapKind::Fg) {
        closing.unwrap_or(0)
    } else {
        0
    }
}

pub fn process(args: ProcessArgs) -> Result<ExitCode> {
    let params = args.ecc.params();
    let maps = args.maps.maps.0.clone();
    let threads = args.maps.threads();
    let mut pipeline = Pipeline::new(params, closing_radius(&maps, args.maps.closing), threads)?;

    // Everything that can be checked up front is checked before any output
    // is created.
    let source = open_source(&args.input.input, args.input.format, args.input.raw_dims)
        .with_context(|| format!("opening {}", args.input.input.display()))?;
    let dims = source.dims();

    for kind in &maps {
        let dir = args.out.join(kind.as_str());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut dumps = if args.float_dump { Some(DumpSet::create(&args.out, &maps)?) } else { None };

    let start = Instant::now();
    let mut frames = 0u64;
    for frame in source.prefetch(args.prefetch) {
        let frame = frame?;
        let bundle = pipeline.push(&frame)?;
        for &kind in &maps {
            let path = args.out.join(kind.as_str()).join(format!("{:06}.pgm", frame.index()));
            write_map_image(bundle, kind, &path)?;
        }
        if let Some(d) = dumps.as_mut() {
            d.write(frame.index(), bundle)?;
        }
        frames += 1;
    }
    if let Some(d) = dumps {
        d.finish()?;
    }

    let secs = start.elapsed().as_secs_f64();
    let shape = dims.map_or_else(|| "-".to_string(), |d| d.to_string());
    let fps = if secs > 0.0 { frames as f64 / secs } else { 0.0 };
    println!("processed {frames} frames ({shape}) in {secs:.3} s, {fps:.1} fps with output, {threads} threads");
    Ok(ExitCode::SUCCESS)
}

pub fn eval(args: EvalArgs) -> Result<ExitCode> {
    let report = evaluate_dirs(&args.pred_dir, &args.truth_dir)?;
    print!("{}", report.table());
    if let Some(path) = &args.report {
        fs::write(path, report.key_values()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

/// `synthetic:FRAMESxAxBxC`
fn parse_synthetic(spec: &str) -> Result<(usize, FrameDims)> {
    let (frames, dims) = spec
        .split_once('x')
        .with_context(|| format!("synthetic input must look like {SYNTHETIC_PREFIX}FRAMESxAxBxC, got {spec:?}"))?;
    let frames: usize = frames.parse().with_context(|| format!("bad frame count {frames:?}"))?;
    let dims: FrameDims = dims.parse()?;
    if frames == 0 {
        bail!("synthetic input needs at least one frame");
    }
    Ok((frames, dims))
}

fn load_bench_frames(args: &BenchArgs) -> Result<Vec<Frame>> {
    if let Some(spec) = args.input.strip_prefix(SYNTHETIC_PREFIX) {
        let (count, dims) = parse_synthetic(spec)?;
        return Ok(moving_square_stream(count, dims, SYNTHETIC_NOISE, args.seed));
    }
    let path = Path::new(&args.input);
    let source: FrameSource = open_source(path, args.format, args.raw_dims)
        .with_context(|| format!("opening {}", path.display()))?;
    Ok(source.collect::<Result<Vec<_>, _>>()?)
}

fn write_dumps(frames: &[Frame], params: EccParams, cfg: &BenchConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut pipeline = Pipeline::new(params, closing_radius(&cfg.maps, Some(cfg.closing_radius)), cfg.threads)?;
    let mut dumps = DumpSet::create(out, &cfg.maps)?;
    for frame in frames {
        let bundle = pipeline.push(frame)?;
        dumps.write(frame.index(), bundle)?;
    }
    dumps.finish()
}

pub fn bench(args: BenchArgs) -> Result<ExitCode> {
    let params = args.ecc.params();
    let cfg = BenchConfig {
        params,
        closing_radius: args.maps.closing.unwrap_or(0),
        threads: args.maps.threads(),
        maps: args.maps.maps.0.clone(),
        repeat: args.repeat as usize,
    };
    let frames = load_bench_frames(&args)?;
    let report = benchmark_frames(&frames, &cfg)?;
    print!("{}", report.table());
    if let Some(path) = &args.report {
        fs::write(path, report.key_values()).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.float_dump {
        let out = args.out.as_deref().expect("clap enforces --out with --float-dump");
        write_dumps(&frames, params, &cfg, out)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn selftest(args: SelftestArgs) -> Result<ExitCode> {
    let seed = args.seed.unwrap_or_else(rand::random);
    let config = SelftestConfig {
        seed,
        sequences: args.sequences,
        fault: args.inject_fault.then_some(Fault::PlainEuclidean),
    };
    let report = run_selftest(&config);
    print!("{}", report.render());
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_SELFTEST) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_spec() {
        let (n, d) = parse_synthetic("633x128x160x3").unwrap();
        assert_eq!(n, 633);
        assert_eq!(d, FrameDims::new(128, 160, 3).unwrap());
        assert!(parse_synthetic("0x2x2x1").is_err());
        assert!(parse_synthetic("10x2x2").is_err());
        assert!(parse_synthetic("ax2x2x1").is_err());
    }

    #[test]
    fn closing_needs_fg() {
        assert_eq!(closing_radius(&[MapKind::E], Some(2)), 0);
        assert_eq!(closing_radius(&[MapKind::Fg], Some(2)), 2);
        assert_eq!(closing_radius(&[MapKind::Fg], None), 0);
    }
}
