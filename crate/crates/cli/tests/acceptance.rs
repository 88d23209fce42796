//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use eccmap::ecc::oracle::batch_eccentricity_oracle;
use eccmap::ecc::normalize;
use eccmap::engine::{foreground_mask, Pipeline};
use eccmap::eval::{benchmark_frames, compute_metrics, BenchConfig, ConfusionCounts, REFERENCE_FRAMES, REFERENCE_SECONDS};
use eccmap::frameio::pnm;
use eccmap::synth::{moving_square_stream, noise_stream};
use eccmap::{EccParams, Frame, FrameDims, Mask, MapKind, Raster, StreamState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

const SEED: u64 = 0x5eed;

fn random_sequence(rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let len = rng.gen_range(2..=50);
    let dim = rng.gen_range(1..=3);
    (0..len).map(|_| (0..dim).map(|_| rng.gen_range(0.0..=255.0)).collect()).collect()
}

fn sequences() -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..1000).map(|_| random_sequence(&mut rng)).collect()
}

fn c1_oracle_equivalence() -> Outcome {
    let seqs = sequences();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut steps = 0;
    for (n, seq) in seqs.iter().enumerate() {
        let mut state = StreamState::new(seq[0].len());
        for k in 0..seq.len() {
            let got = state.update_infinite(&seq[k]).map_err(|e| e.to_string())?;
            let want = batch_eccentricity_oracle(&seq[..=k], k).ok();
            match (got, want) {
                (Some(g), Some(w)) => {
                    worst = worst.max((g - w).abs());
                    steps += 1;
                }
                (None, None) => {}
                (g, w) => return Err(format!("sequence {n} step {}: {g:?} vs oracle {w:?}", k + 1)),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if worst > 1e-9 {
        return Err(format!("max |diff| {worst:e} > 1e-9"));
    }
    if secs >= 5.0 {
        return Err(format!("took {secs:.2} s (limit 5 s)"));
    }
    Ok(format!("{} sequences, {steps} steps, max |diff| {worst:.1e}, {secs:.3} s", seqs.len()))
}

fn c2_sum_rule() -> Outcome {
    let mut worst = 0.0f64;
    for (n, seq) in sequences().iter().enumerate() {
        let mut state = StreamState::new(seq[0].len());
        for x in seq {
            state.update_infinite(x).map_err(|e| e.to_string())?;
        }
        // Every sample's eccentricity against the recursively maintained state.
        let k = state.count() as f64;
        let var = state.variance();
        let from_state: f64 = seq
            .iter()
            .map(|x| {
                let d2: f64 = x.iter().zip(state.mean()).map(|(a, b)| (a - b) * (a - b)).sum();
                1.0 / k + d2 / (k * var)
            })
            .sum();
        let from_oracle: f64 = (0..seq.len())
            .map(|i| batch_eccentricity_oracle(seq, i))
            .sum::<Result<f64, _>>()
            .map_err(|e| format!("sequence {n}: {e}"))?;
        for s in [from_state, from_oracle] {
            worst = worst.max((s - 2.0).abs());
        }
    }
    if worst > 1e-9 {
        return Err(format!("max |sum - 2| {worst:e} > 1e-9"));
    }
    Ok(format!("1000 sequences, max |sum - 2| {worst:.1e}"))
}

fn c3_boundedness() -> Outcome {
    let dims = FrameDims::new(48, 64, 3).unwrap();
    let runs: [(f64, f64, Vec<Frame>); 3] = [
        (0.05, 10.0, noise_stream(120, dims, 1)),
        (0.3, 0.0, noise_stream(120, dims, 2)),
        (0.01, 10.0, moving_square_stream(120, dims, 5, 3)),
    ];
    let mut updates = 0u64;
    for (alpha, gamma, frames) in &runs {
        let params = EccParams::new(*alpha, *gamma, 3.0).map_err(|e| e.to_string())?;
        let mut p = Pipeline::new(params, 0, 1).map_err(|e| e.to_string())?;
        for f in frames {
            let b = p.push(f).map_err(|e| e.to_string())?;
            for kind in [MapKind::E, MapKind::Pos, MapKind::Neg, MapKind::Signed] {
                let map = b.scalar_map(kind).unwrap();
                if let Some(v) = map.as_slice().iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
                    return Err(format!("{kind} value {v} at frame {} (alpha {alpha})", f.index()));
                }
            }
            if b.xi.as_slice().iter().any(|v| !v.is_finite()) {
                return Err(format!("non-finite raw eccentricity at frame {}", f.index()));
            }
            if b.e_pos.as_slice().iter().zip(b.e_neg.as_slice()).any(|(p, n)| p * n != 0.0) {
                return Err(format!("pos and neg both nonzero at frame {}", f.index()));
            }
            updates += dims.pixels() as u64;
        }
    }
    if updates < 1_000_000 {
        return Err(format!("only {updates} pixel-updates"));
    }
    Ok(format!("{updates} pixel-updates, all maps in [0, 1], pos*neg = 0"))
}

fn c4_step_response() -> Outcome {
    let dims = FrameDims::new(8, 8, 1).unwrap();
    let (jr, jc) = (3, 5);
    let background: Vec<u8> = (0..64).map(|i| if i == jr * 8 + jc { 0 } else { (i * 37 % 256) as u8 }).collect();
    let params = EccParams::new(0.05, 10.0, 3.0).map_err(|e| e.to_string())?;
    let mut p = Pipeline::new(params, 0, 1).map_err(|e| e.to_string())?;
    for i in 1..=100 {
        p.push(&Frame::from_u8(i, dims, &background).unwrap()).map_err(|e| e.to_string())?;
    }
    let mut jumped = background.clone();
    jumped[jr * 8 + jc] = 255;
    let b = p.push(&Frame::from_u8(101, dims, &jumped).unwrap()).map_err(|e| e.to_string())?;
    let eps = b.e.get(jr, jc);
    if eps < 0.99 - 0.005 {
        return Err(format!("eps at jump pixel {eps} < 0.99 (tol 0.005)"));
    }
    let mut expected = Mask::filled(8, 8, 0);
    expected.set(jr, jc, 1);
    if b.fg != expected {
        return Err(format!("mask has {} foreground pixels, expected only the jump pixel", b.fg.count_ones()));
    }
    Ok(format!("eps {eps:.6}, F = 1 only at the jump pixel"))
}

fn c5_fixed_point() -> Outcome {
    let dims = FrameDims::new(16, 20, 3).unwrap();
    let frame = &noise_stream(1, dims, 8)[0];
    let second = Frame::new(2, dims, frame.data().to_vec()).unwrap();
    for warmup in [0, EccParams::default().warmup()] {
        let params = EccParams::default().with_warmup(warmup);
        let mut p = Pipeline::new(params, 1, 1).map_err(|e| e.to_string())?;
        p.push(frame).map_err(|e| e.to_string())?;
        let b = p.push(&second).map_err(|e| e.to_string())?;
        if let Some(v) = b.e.as_slice().iter().find(|&&v| v != 0.0) {
            return Err(format!("E has value {v} on the repeated frame (warmup {warmup})"));
        }
        if b.fg.count_ones() != 0 {
            return Err(format!("F has {} pixels on the repeated frame (warmup {warmup})", b.fg.count_ones()));
        }
    }
    Ok("E == 0 and F empty on the repeated frame".into())
}

fn c6_thresholds() -> Outcome {
    let params = EccParams::new(0.05, 10.0, 3.0).map_err(|e| e.to_string())?;
    let (alpha, m) = (0.05f64, 3.0f64);
    let xi_closed = alpha * (m * m + 1.0) / 2.0;
    let eps_closed = alpha * (m * m - 1.0) / (2.0 * (1.0 - alpha));
    let xi_t = params.finite_threshold();
    let eps_t = params.finite_threshold_normalized();
    if (xi_t - 0.25).abs() > 1e-12 || (xi_closed - 0.25).abs() > 1e-12 {
        return Err(format!("xi threshold {xi_t} / {xi_closed}, expected 0.25"));
    }
    if (eps_t - eps_closed).abs() > 1e-12 || (eps_t - 0.21053).abs() > 5e-6 {
        return Err(format!("eps threshold {eps_t} / {eps_closed}, expected ~0.21053"));
    }
    let via_normalize = normalize(xi_t, &params).map_err(|e| e.to_string())?;
    if (via_normalize - eps_t).abs() > 1e-12 {
        return Err(format!("normalized xi threshold {via_normalize} != {eps_t}"));
    }

    // Boundary masks: exactly at the threshold is background.
    let xi = Raster::from_vec(1, 4, vec![0.25, 0.25 + 1e-9, 0.25 - 1e-9, 1.0]).unwrap();
    let mask = foreground_mask(&xi, &params);
    if mask.as_slice() != [0, 1, 0, 1] {
        return Err(format!("boundary mask {:?}, expected [0, 1, 0, 1]", mask.as_slice()));
    }
    // Away from the exact boundary the normalized scale gives the same decisions.
    for (&x, &f) in xi.as_slice().iter().zip(mask.as_slice()).skip(1) {
        let eps = normalize(x, &params).map_err(|e| e.to_string())?;
        if (eps > eps_t) != (f == 1) {
            return Err(format!("xi {x} (eps {eps}) decided {f}, inconsistent with eps threshold {eps_t}"));
        }
    }
    Ok(format!("xi threshold {xi_t}, eps threshold {eps_t:.6}, boundary masks ok"))
}

fn c7_metrics_fixture() -> Outcome {
    let pred = Mask::from_rows(&[&[1, 1, 1, 0], &[1, 1, 1, 0], &[1, 1, 0, 0], &[0, 0, 0, 0]]);
    let truth = Mask::from_rows(&[&[1, 1, 1, 0], &[1, 1, 0, 0], &[1, 0, 0, 1], &[0, 0, 0, 0]]);
    let mut counts = ConfusionCounts::default();
    counts.accumulate(&pred, &truth).map_err(|e| e.to_string())?;
    let m = compute_metrics(&counts).map_err(|e| e.to_string())?;
    let checks = [
        ("tpr", m.tpr.unwrap_or(f64::NAN), 6.0 / 7.0),
        ("ppv", m.ppv.unwrap_or(f64::NAN), 0.75),
        ("acc", m.acc, 0.8125),
        ("f1", m.f1.unwrap_or(f64::NAN), 0.8),
    ];
    for (name, got, want) in checks {
        if got.is_nan() || (got - want).abs() > 1e-12 {
            return Err(format!("{name} = {got}, expected {want}"));
        }
    }
    Ok(format!("tp={} fp={} tn={} fn={}, tpr/ppv/acc/f1 within 1e-12", counts.tp, counts.fp, counts.tn, counts.fn_))
}

fn c8_throughput() -> Outcome {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let dims = FrameDims::new(128, 160, 3).unwrap();
    let frames = moving_square_stream(REFERENCE_FRAMES, dims, 4, SEED);
    let run = |threads| {
        let cfg = BenchConfig { threads, repeat: 3, maps: MapKind::ALL.to_vec(), ..Default::default() };
        benchmark_frames(&frames, &cfg).map_err(|e| e.to_string())
    };
    let single = run(1)?;
    let multi_threads = cores.max(2);
    let multi = run(multi_threads)?;
    let reference = REFERENCE_FRAMES as f64 / REFERENCE_SECONDS;
    let summary = format!(
        "1 thread {:.0} fps, {multi_threads} threads {:.0} fps on {cores} cores (reference {reference:.0} fps)",
        single.fps, multi.fps
    );
    if single.fps < 500.0 || multi.fps < 1500.0 {
        return Err(format!("{summary}; need >= 500 and >= 1500"));
    }
    Ok(summary)
}

fn eccmap(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_eccmap")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("eccmap {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn c9_eval_report() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (input, truth, out) = (tmp.path().join("in"), tmp.path().join("gt"), tmp.path().join("out"));
    for d in [&input, &truth] {
        fs::create_dir_all(d).map_err(|e| e.to_string())?;
    }
    let (h, w, side) = (48usize, 64usize, 8usize);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 1..=50usize {
        let (r0, c0) = ((i * 2) % (h - side), (i * 3) % (w - side));
        let mut rgb = Vec::with_capacity(h * w * 3);
        let mut gt = Vec::with_capacity(h * w);
        for r in 0..h {
            for c in 0..w {
                let inside = (r0..r0 + side).contains(&r) && (c0..c0 + side).contains(&c);
                let base = if inside { 220 } else { 40 + (r + c) as i32 };
                for _ in 0..3 {
                    rgb.push((base + rng.gen_range(-3..=3)).clamp(0, 255) as u8);
                }
                gt.push(if inside { 255 } else { 0 });
            }
        }
        pnm::write(&input.join(format!("in{i:06}.ppm")), w, h, 3, &rgb).map_err(|e| e.to_string())?;
        if i > 20 {
            pnm::write(&truth.join(format!("gt{i:06}.pgm")), w, h, 1, &gt).map_err(|e| e.to_string())?;
        }
    }
    eccmap(&["process", "--input", path_str(&input), "--maps", "fg", "--closing", "--out", path_str(&out)])?;
    let report = tmp.path().join("report.txt");
    let table = eccmap(&["eval", path_str(&out.join("fg")), path_str(&truth), "--report", path_str(&report)])?;
    if !table.contains("F1") {
        return Err("eval table has no F1 column".into());
    }
    let kv = fs::read_to_string(&report).map_err(|e| e.to_string())?;
    let get = |key: &str| kv.lines().find_map(|l| l.strip_prefix(key).and_then(|v| v.strip_prefix('=')));
    let frames = get("frames").ok_or("report lacks frames")?;
    let f1: f64 = get("f1").ok_or("report lacks f1")?.parse().map_err(|_| "f1 is not a number")?;
    if frames != "30" || !(0.0..=1.0).contains(&f1) {
        return Err(format!("report frames={frames} f1={f1}"));
    }
    Ok(format!("F1 report produced (synthetic clip, {frames} frames, f1 {f1:.3}); dataset F1 range is a soft target"))
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut dirs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(format!("t{threads}"));
        eccmap(&["bench", "--seed", "7", "--threads", threads, "--repeat", "1", "--float-dump", "--out", path_str(&out)])?;
        dirs.push(out);
    }
    let mut bytes = 0;
    for kind in MapKind::ALL {
        let name = format!("{}.eccm", kind.as_str());
        let a = fs::read(dirs[0].join(&name)).map_err(|e| format!("{name}: {e}"))?;
        let b = fs::read(dirs[1].join(&name)).map_err(|e| format!("{name}: {e}"))?;
        if a.is_empty() || a != b {
            return Err(format!("{name} differs between 1 and 4 threads"));
        }
        bytes += a.len();
    }
    Ok(format!("five dumps bit-identical across 1 and 4 threads ({bytes} bytes each run)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("oracle equivalence", c1_oracle_equivalence),
        ("sum rule", c2_sum_rule),
        ("boundedness", c3_boundedness),
        ("step response", c4_step_response),
        ("fixed point", c5_fixed_point),
        ("threshold constants", c6_thresholds),
        ("metrics fixture", c7_metrics_fixture),
        ("throughput", c8_throughput),
        ("eval F1 report", c9_eval_report),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
