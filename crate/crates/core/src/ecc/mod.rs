//! Eccentricity of a data stream relative to its own running statistics.
//!
//! Two recursions are provided:
//!
//! * infinite memory, where every past sample carries weight `1/k`
//!   ([`StreamState::update_infinite`]);
//! * finite memory, where a constant forgetting factor `alpha` replaces `1/k`
//!   so older samples decay exponentially ([`StreamState::step_finite`]).
//!
//! The finite-memory eccentricity is normalized into `[0, 1]` and split into a
//! positive and a negative component depending on whether the sample's squared
//! norm is above or below that of the running mean. The batch form in
//! [`oracle`] is kept as an independent reference for the infinite recursion.

pub mod oracle;

use thiserror::Error;

pub use oracle::{batch_eccentricity_oracle, batch_eccentricity_with, euclidean, squared_euclidean};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EccError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("degenerate input: pairwise distance sum is zero")]
    Degenerate,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

/// Default forgetting factor.
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Default variance floor, in squared 8-bit intensity units.
pub const DEFAULT_GAMMA: f64 = 10.0;
/// Default Chebyshev multiplier.
pub const DEFAULT_M: f64 = 3.0;

/// Parameters of the finite-memory recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EccParams {
    alpha: f64,
    gamma: f64,
    m: f64,
    warmup: u64,
}

impl EccParams {
    /// Validated constructor. The warm-up length defaults to the effective
    /// window `ceil(1/alpha)`.
    pub fn new(alpha: f64, gamma: f64, m: f64) -> Result<Self, EccError> {
        check_alpha(alpha)?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(EccError::InvalidParams(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(EccError::InvalidParams(format!("m must be finite and > 0, got {m}")));
        }
        Ok(Self { alpha, gamma, m, warmup: effective_window(alpha) })
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Number of leading frames for which foreground output is suppressed.
    pub fn warmup(&self) -> u64 {
        self.warmup
    }

    /// Chebyshev threshold on the raw eccentricity: `alpha (m^2 + 1) / 2`.
    pub fn finite_threshold(&self) -> f64 {
        self.alpha * (self.m * self.m + 1.0) / 2.0
    }

    /// The same threshold expressed on the normalized scale:
    /// `alpha (m^2 - 1) / (2 (1 - alpha))`.
    pub fn finite_threshold_normalized(&self) -> f64 {
        self.alpha * (self.m * self.m - 1.0) / (2.0 * (1.0 - self.alpha))
    }
}

impl Default for EccParams {
    fn default() -> Self {
        Self::new(DEFAULT_ALPHA, DEFAULT_GAMMA, DEFAULT_M).expect("default parameters are valid")
    }
}

fn check_alpha(alpha: f64) -> Result<(), EccError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(EccError::InvalidParams(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Width of the moving window implied by a forgetting factor, `ceil(1/alpha)`.
///
/// # Panics
/// Panics if `alpha` is outside `(0, 1)`.
pub fn effective_window(alpha: f64) -> u64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1), got {alpha}");
    (1.0 / alpha).ceil() as u64
}

/// Which Chebyshev threshold to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Infinite memory after `k` samples: `(m^2 + 1) / (2k)`.
    Infinite { k: u64 },
    /// Finite memory: `alpha (m^2 + 1) / 2`.
    Finite,
}

/// Anomaly threshold on the raw eccentricity scale.
pub fn anomaly_threshold(params: &EccParams, mode: ThresholdMode) -> Result<f64, EccError> {
    let m2 = params.m * params.m;
    match mode {
        ThresholdMode::Infinite { k: 0 } => {
            Err(EccError::ContractViolation("infinite threshold needs k >= 1".into()))
        }
        ThresholdMode::Infinite { k } => Ok((m2 + 1.0) / (2.0 * k as f64)),
        ThresholdMode::Finite => Ok(params.finite_threshold()),
    }
}

/// Eccentricity of one sample together with its normalized components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EccValues {
    pub xi: f64,
    pub eps: f64,
    pub eps_pos: f64,
    pub eps_neg: f64,
    pub eps_signed: f64,
}

/// Maps a raw finite-memory eccentricity onto `[0, 1]`.
///
/// The result is clamped at 1 to absorb rounding in `xi`, which is bounded by
/// 1 in exact arithmetic.
#[inline]
pub fn normalize(xi: f64, params: &EccParams) -> Result<f64, EccError> {
    if xi.is_nan() || xi < params.alpha {
        return Err(EccError::ContractViolation(format!(
            "eccentricity {xi} is below alpha {}",
            params.alpha
        )));
    }
    Ok(normalize_unchecked(xi, params.alpha))
}

#[inline(always)]
fn normalize_unchecked(xi: f64, alpha: f64) -> f64 {
    ((xi - alpha) / (1.0 - alpha)).min(1.0)
}

/// Splits a normalized eccentricity by the direction of change.
///
/// Returns `(eps_pos, eps_neg, eps_signed)`. Samples whose squared norm equals
/// that of the mean count as positive.
#[inline]
pub fn decompose(eps: f64, x: &[f64], mean: &[f64]) -> (f64, f64, f64) {
    let (pos, neg) = if squared_norm(x) >= squared_norm(mean) { (eps, 0.0) } else { (0.0, eps) };
    (pos, neg, 0.5 + (pos - neg) / 2.0)
}

#[inline(always)]
fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

#[inline(always)]
pub(crate) fn squared_deviation(x: &[f64], mean: &[f64]) -> f64 {
    x.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// One finite-memory update of a mean/variance pair. Mean first, then the
/// variance using the updated mean.
#[inline(always)]
pub(crate) fn finite_update_in_place(mean: &mut [f64], variance: &mut f64, x: &[f64], alpha: f64) {
    let keep = 1.0 - alpha;
    for (mu, xi) in mean.iter_mut().zip(x) {
        *mu = keep * *mu + alpha * xi;
    }
    let d2 = squared_deviation(x, mean);
    *variance = keep * *variance + alpha * d2 / keep;
}

#[inline(always)]
pub(crate) fn finite_eccentricity_raw(mean: &[f64], variance: f64, x: &[f64], params: &EccParams) -> f64 {
    let d2 = squared_deviation(x, mean);
    if d2 == 0.0 {
        // also covers variance == gamma == 0
        return params.alpha;
    }
    params.alpha + params.alpha * d2 / variance.max(params.gamma)
}

/// Full per-sample pipeline on borrowed state: initialize or update, then
/// evaluate. Shared by [`StreamState`] and the per-pixel grid so both produce
/// identical bits.
#[inline(always)]
pub(crate) fn finite_step_in_place(
    mean: &mut [f64],
    variance: &mut f64,
    first: bool,
    x: &[f64],
    params: &EccParams,
) -> EccValues {
    if first {
        mean.copy_from_slice(x);
        *variance = 0.0;
    } else {
        finite_update_in_place(mean, variance, x, params.alpha);
    }
    let xi = finite_eccentricity_raw(mean, *variance, x, params);
    let eps = normalize_unchecked(xi, params.alpha);
    let (eps_pos, eps_neg, eps_signed) = decompose(eps, x, mean);
    EccValues { xi, eps, eps_pos, eps_neg, eps_signed }
}

/// Running statistics of a single stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    mean: Vec<f64>,
    variance: f64,
    count: u64,
}

impl StreamState {
    pub fn new(channels: usize) -> Self {
        Self { mean: vec![0.0; channels], variance: 0.0, count: 0 }
    }

    /// Builds a state directly, e.g. to resume a stream.
    pub fn from_parts(mean: Vec<f64>, variance: f64, count: u64) -> Result<Self, EccError> {
        if variance.is_nan() || variance < 0.0 {
            return Err(EccError::InvalidParams(format!("variance must be >= 0, got {variance}")));
        }
        Ok(Self { mean, variance, count })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    fn check_dims(&self, x: &[f64]) -> Result<(), EccError> {
        if x.len() != self.mean.len() {
            return Err(EccError::DimensionMismatch { expected: self.mean.len(), got: x.len() });
        }
        Ok(())
    }

    /// Infinite-memory update. Returns the eccentricity of `x`, or `None`
    /// while it is undefined (fewer than two samples or zero variance).
    pub fn update_infinite(&mut self, x: &[f64]) -> Result<Option<f64>, EccError> {
        self.check_dims(x)?;
        self.count += 1;
        let k = self.count as f64;
        if self.count == 1 {
            self.mean.copy_from_slice(x);
            self.variance = 0.0;
            return Ok(None);
        }
        for (mu, xi) in self.mean.iter_mut().zip(x) {
            *mu = (k - 1.0) / k * *mu + xi / k;
        }
        let d2 = squared_deviation(x, &self.mean);
        self.variance = (k - 1.0) / k * self.variance + d2 / (k - 1.0);
        if self.variance > 0.0 {
            Ok(Some(1.0 / k + d2 / (k * self.variance)))
        } else {
            Ok(None)
        }
    }

    /// Finite-memory update of mean and variance. The first sample initializes
    /// the state (mean = sample, variance = 0).
    pub fn update_finite(&mut self, x: &[f64], params: &EccParams) -> Result<(), EccError> {
        self.check_dims(x)?;
        if self.count == 0 {
            self.mean.copy_from_slice(x);
            self.variance = 0.0;
        } else {
            finite_update_in_place(&mut self.mean, &mut self.variance, x, params.alpha);
        }
        self.count += 1;
        Ok(())
    }

    /// Raw finite-memory eccentricity of `x` against the current (already
    /// updated) state.
    pub fn eccentricity_finite(&self, x: &[f64], params: &EccParams) -> Result<f64, EccError> {
        self.check_dims(x)?;
        Ok(finite_eccentricity_raw(&self.mean, self.variance, x, params))
    }

    /// Update with `x` and evaluate all finite-memory measures for it.
    pub fn step_finite(&mut self, x: &[f64], params: &EccParams) -> Result<EccValues, EccError> {
        self.check_dims(x)?;
        let values = finite_step_in_place(&mut self.mean, &mut self.variance, self.count == 0, x, params);
        self.count += 1;
        Ok(values)
    }
}
