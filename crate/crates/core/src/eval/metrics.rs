use std::ops::{Add, AddAssign};

use super::EvalError;
use crate::raster::Mask;

/// Pixel-level confusion counts, foreground as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Adds one predicted/truth pair.
    pub fn accumulate(&mut self, predicted: &Mask, truth: &Mask) -> Result<(), EvalError> {
        if predicted.dims() != truth.dims() {
            return Err(EvalError::DimensionMismatch { predicted: predicted.dims(), truth: truth.dims() });
        }
        for (&p, &t) in predicted.as_slice().iter().zip(truth.as_slice()) {
            match (p != 0, t != 0) {
                (true, true) => self.tp += 1,
                (true, false) => self.fp += 1,
                (false, false) => self.tn += 1,
                (false, true) => self.fn_ += 1,
            }
        }
        Ok(())
    }

    /// Counts with prediction and truth exchanged.
    pub fn transposed(&self) -> Self {
        Self { tp: self.tp, fp: self.fn_, tn: self.tn, fn_: self.fp }
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self { tp: self.tp + o.tp, fp: self.fp + o.fp, tn: self.tn + o.tn, fn_: self.fn_ + o.fn_ }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Ratios that have no defined value (empty denominator) are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegMetrics {
    /// Recall.
    pub tpr: Option<f64>,
    /// Precision.
    pub ppv: Option<f64>,
    pub acc: f64,
    pub f1: Option<f64>,
}

pub fn compute_metrics(counts: &ConfusionCounts) -> Result<SegMetrics, EvalError> {
    let total = counts.total();
    if total == 0 {
        return Err(EvalError::NoPixels);
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let tpr = ratio(counts.tp, counts.tp + counts.fn_);
    let ppv = ratio(counts.tp, counts.tp + counts.fp);
    let f1 = match (tpr, ppv) {
        (Some(r), Some(p)) if r + p > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(SegMetrics { tpr, ppv, acc: (counts.tp + counts.tn) as f64 / total as f64, f1 })
}
