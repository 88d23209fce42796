use std::hint::black_box;
use std::time::Instant;

use super::EvalError;
use crate::ecc::EccParams;
use crate::engine::{MapKind, Pipeline};
use crate::frame::{Frame, FrameDims};
use crate::frameio::{FrameError, FrameSource};

/// Published reference timing: 633 frames of 160x128 in 0.142 s on a
/// 2.8 GHz desktop CPU without GPU.
pub const REFERENCE_FRAMES: usize = 633;
pub const REFERENCE_SECONDS: f64 = 0.142;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub params: EccParams,
    pub closing_radius: usize,
    pub threads: usize,
    /// Maps the caller needs. All maps are always computed; an empty set is
    /// rejected and closing only runs when `fg` is requested.
    pub maps: Vec<MapKind>,
    pub repeat: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { params: EccParams::default(), closing_radius: 0, threads: 1, maps: MapKind::ALL.to_vec(), repeat: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub frames: usize,
    /// Median wall-clock seconds over the repeats.
    pub elapsed: f64,
    pub fps: f64,
    pub dims: FrameDims,
    pub threads: usize,
    /// Every repeat, in run order.
    pub runs: Vec<f64>,
}

impl TimingReport {
    pub fn table(&self) -> String {
        let reference_fps = REFERENCE_FRAMES as f64 / REFERENCE_SECONDS;
        format!(
            "frames {}  resolution {}  threads {}  median {:.4} s  {:.1} fps  (repeats {})\n\
             reference: {} frames in {:.3} s = {:.0} fps\n",
            self.frames,
            self.dims,
            self.threads,
            self.elapsed,
            self.fps,
            self.runs.len(),
            REFERENCE_FRAMES,
            REFERENCE_SECONDS,
            reference_fps,
        )
    }

    pub fn key_values(&self) -> String {
        let runs: Vec<String> = self.runs.iter().map(|r| format!("{r}")).collect();
        format!(
            "frames={}\nheight={}\nwidth={}\nchannels={}\nthreads={}\nelapsed_s={}\nfps={}\nruns_s={}\nreference_frames={}\nreference_s={}\n",
            self.frames,
            self.dims.height,
            self.dims.width,
            self.dims.channels,
            self.threads,
            self.elapsed,
            self.fps,
            runs.join(","),
            REFERENCE_FRAMES,
            REFERENCE_SECONDS,
        )
    }
}

/// Times map generation over in-memory frames. State allocation happens
/// before the clock starts; no output is written.
pub fn benchmark_frames(frames: &[Frame], config: &BenchConfig) -> Result<TimingReport, EvalError> {
    if config.maps.is_empty() {
        return Err(EvalError::NothingToTime("no maps requested"));
    }
    if config.repeat == 0 {
        return Err(EvalError::NothingToTime("repeat count is 0"));
    }
    let Some(first) = frames.first() else {
        return Err(EvalError::NothingToTime("empty source"));
    };
    let dims = first.dims();
    let closing = if config.maps.contains(&MapKind::Fg) { config.closing_radius } else { 0 };

    let mut runs = Vec::with_capacity(config.repeat);
    let mut threads = 1;
    for _ in 0..config.repeat {
        let mut pipeline = Pipeline::new(config.params, closing, config.threads)?;
        pipeline.prepare(dims)?;
        threads = pipeline.threads();
        let start = Instant::now();
        for frame in frames {
            black_box(pipeline.push(frame)?);
        }
        runs.push(start.elapsed().as_secs_f64());
    }
    let mut sorted = runs.clone();
    sorted.sort_by(f64::total_cmp);
    let elapsed = sorted[sorted.len() / 2];
    Ok(TimingReport { frames: frames.len(), elapsed, fps: frames.len() as f64 / elapsed, dims, threads, runs })
}

/// Loads the whole source into memory (untimed), then benchmarks it.
pub fn benchmark(
    mut open: impl FnMut() -> Result<FrameSource, FrameError>,
    config: &BenchConfig,
) -> Result<TimingReport, EvalError> {
    let frames = open()?.collect::<Result<Vec<_>, _>>()?;
    benchmark_frames(&frames, config)
}
