//! Batch eccentricity by direct double summation over all sample pairs.
//!
//! This is quadratic in the number of samples and exists to check the
//! recursive form. It only agrees with the recursion when the distance is the
//! squared Euclidean distance.

use super::EccError;

pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Eccentricity of `samples[index]` within `samples`, squared Euclidean.
pub fn batch_eccentricity_oracle<S: AsRef<[f64]>>(samples: &[S], index: usize) -> Result<f64, EccError> {
    batch_eccentricity_with(samples, index, squared_euclidean)
}

/// Eccentricity of `samples[index]` under an arbitrary distance.
pub fn batch_eccentricity_with<S, D>(samples: &[S], index: usize, distance: D) -> Result<f64, EccError>
where
    S: AsRef<[f64]>,
    D: Fn(&[f64], &[f64]) -> f64,
{
    let k = samples.len();
    if k < 2 {
        return Err(EccError::TooFewSamples(k));
    }
    if index >= k {
        return Err(EccError::IndexOutOfRange { index, len: k });
    }
    let dim = samples[0].as_ref().len();
    if let Some(bad) = samples.iter().find(|s| s.as_ref().len() != dim) {
        return Err(EccError::DimensionMismatch { expected: dim, got: bad.as_ref().len() });
    }

    let target = samples[index].as_ref();
    let numerator: f64 = samples.iter().map(|s| distance(target, s.as_ref())).sum();
    let mut total = 0.0;
    for a in samples {
        for b in samples {
            total += distance(a.as_ref(), b.as_ref());
        }
    }
    if total <= 0.0 {
        return Err(EccError::Degenerate);
    }
    Ok(2.0 * numerator / total)
}
