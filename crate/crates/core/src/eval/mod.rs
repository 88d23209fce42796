//! Segmentation scoring against ground truth and throughput benchmarking.

mod bench;
mod metrics;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use bench::{benchmark, benchmark_frames, BenchConfig, TimingReport, REFERENCE_FRAMES, REFERENCE_SECONDS};
pub use metrics::{compute_metrics, ConfusionCounts, SegMetrics};

use crate::engine::EngineError;
use crate::frameio::{list_indexed_images, load_truth_mask, FrameError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction is {}x{}, truth is {}x{}", predicted.0, predicted.1, truth.0, truth.1)]
    DimensionMismatch { predicted: (usize, usize), truth: (usize, usize) },
    #[error("no pixels were scored")]
    NoPixels,
    #[error("no prediction/truth pairs share a frame index ({} vs {})", pred.display(), truth.display())]
    NoMatchedPairs { pred: PathBuf, truth: PathBuf },
    #[error("nothing to time: {0}")]
    NothingToTime(&'static str),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Totals over every frame that has both a prediction and a truth mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub frames: usize,
    pub unmatched_predictions: usize,
    pub counts: ConfusionCounts,
    pub metrics: SegMetrics,
}

impl EvalReport {
    pub fn table(&self) -> String {
        let f = |v: Option<f64>| v.map_or_else(|| "   n/a".to_string(), |v| format!("{v:6.4}"));
        let mut s = String::new();
        let _ = writeln!(s, "frames      tp          fp          tn          fn       TPR    PPV    ACC    F1");
        let _ = writeln!(
            s,
            "{:<6} {:>11} {:>11} {:>11} {:>11}  {} {} {:6.4} {}",
            self.frames,
            self.counts.tp,
            self.counts.fp,
            self.counts.tn,
            self.counts.fn_,
            f(self.metrics.tpr),
            f(self.metrics.ppv),
            self.metrics.acc,
            f(self.metrics.f1),
        );
        s
    }

    /// One `key=value` per line; undefined ratios are written as `nan`.
    pub fn key_values(&self) -> String {
        let f = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |v| format!("{v}"));
        format!(
            "frames={}\nunmatched_predictions={}\ntp={}\nfp={}\ntn={}\nfn={}\ntpr={}\nppv={}\nacc={}\nf1={}\n",
            self.frames,
            self.unmatched_predictions,
            self.counts.tp,
            self.counts.fp,
            self.counts.tn,
            self.counts.fn_,
            f(self.metrics.tpr),
            f(self.metrics.ppv),
            self.metrics.acc,
            f(self.metrics.f1),
        )
    }
}

/// Scores every prediction in `pred_dir` that has a truth mask with the same
/// filename index in `truth_dir`. Both sides are binarized at > 127.
pub fn evaluate_dirs(pred_dir: &Path, truth_dir: &Path) -> Result<EvalReport, EvalError> {
    let preds = list_indexed_images(pred_dir)?;
    let truths = list_indexed_images(truth_dir)?;
    let mut counts = ConfusionCounts::default();
    let mut frames = 0;
    let mut unmatched = 0;
    for (index, pred_path) in &preds {
        let Ok(pos) = truths.binary_search_by_key(index, |(i, _)| *i) else {
            unmatched += 1;
            continue;
        };
        let pred = load_truth_mask(pred_path, None)?;
        let truth = load_truth_mask(&truths[pos].1, Some(pred.dims()))?;
        counts.accumulate(&pred, &truth)?;
        frames += 1;
    }
    if frames == 0 {
        return Err(EvalError::NoMatchedPairs { pred: pred_dir.to_path_buf(), truth: truth_dir.to_path_buf() });
    }
    let metrics = compute_metrics(&counts)?;
    Ok(EvalReport { frames, unmatched_predictions: unmatched, counts, metrics })
}
