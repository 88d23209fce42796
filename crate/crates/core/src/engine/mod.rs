//! Per-pixel eccentricity maps for image streams.
//!
//! Every pixel is an independent stream whose sample is the vector of its
//! channel intensities. For each incoming frame the engine emits:
//!
//! * `e`: normalized eccentricity,
//! * `e_pos` / `e_neg`: the part of `e` where the pixel brightened / darkened
//!   relative to its running mean,
//! * `e_signed`: `0.5 + (e_pos - e_neg) / 2`,
//! * `fg`: foreground mask, raw eccentricity above the Chebyshev threshold,
//!   optionally closed morphologically.

mod grid;
pub mod morphology;
mod pipeline;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use grid::{IngestOptions, StateGrid};
pub use morphology::binary_closing;
pub use pipeline::Pipeline;

use crate::ecc::EccParams;
use crate::frame::{FrameDims, FrameShapeError};
use crate::raster::{Mask, Raster};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Shape(#[from] FrameShapeError),
    #[error("frame is {got}, stream is {expected}")]
    DimensionMismatch { expected: FrameDims, got: FrameDims },
    #[error("map value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("unknown map kind {0:?}; expected one of e, pos, neg, signed, fg")]
    UnknownMapKind(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// The map products of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MapBundle {
    /// 1-based position of the frame in its stream.
    pub frame_index: u64,
    /// Raw eccentricity, kept for thresholding.
    pub xi: Raster<f64>,
    pub e: Raster<f64>,
    pub e_pos: Raster<f64>,
    pub e_neg: Raster<f64>,
    pub e_signed: Raster<f64>,
    pub fg: Mask,
}

impl MapBundle {
    pub fn new(height: usize, width: usize) -> Self {
        let zeros = Raster::filled(height, width, 0.0);
        Self {
            frame_index: 0,
            xi: zeros.clone(),
            e: zeros.clone(),
            e_pos: zeros.clone(),
            e_neg: zeros,
            e_signed: Raster::filled(height, width, 0.5),
            fg: Mask::filled(height, width, 0),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.e.dims()
    }

    /// The continuous-valued map for `kind`; `None` for the mask.
    pub fn scalar_map(&self, kind: MapKind) -> Option<&Raster<f64>> {
        match kind {
            MapKind::E => Some(&self.e),
            MapKind::Pos => Some(&self.e_pos),
            MapKind::Neg => Some(&self.e_neg),
            MapKind::Signed => Some(&self.e_signed),
            MapKind::Fg => None,
        }
    }

    /// Any map as floats in `[0, 1]` (the mask as 0.0/1.0).
    pub fn map_values(&self, kind: MapKind) -> Raster<f64> {
        match self.scalar_map(kind) {
            Some(r) => r.clone(),
            None => self.fg.map(f64::from),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MapKind {
    E,
    Pos,
    Neg,
    Signed,
    Fg,
}

impl MapKind {
    pub const ALL: [MapKind; 5] = [MapKind::E, MapKind::Pos, MapKind::Neg, MapKind::Signed, MapKind::Fg];

    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::E => "e",
            MapKind::Pos => "pos",
            MapKind::Neg => "neg",
            MapKind::Signed => "signed",
            MapKind::Fg => "fg",
        }
    }

    /// Parses a comma-separated list such as `e,fg`. Duplicates are dropped and
    /// the result is in canonical order.
    pub fn parse_list(list: &str) -> Result<Vec<MapKind>, EngineError> {
        let mut kinds = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<MapKind>, _>>()?;
        kinds.sort();
        kinds.dedup();
        Ok(kinds)
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapKind {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "e" => Ok(MapKind::E),
            "pos" => Ok(MapKind::Pos),
            "neg" => Ok(MapKind::Neg),
            "signed" => Ok(MapKind::Signed),
            "fg" => Ok(MapKind::Fg),
            _ => Err(EngineError::UnknownMapKind(s.to_string())),
        }
    }
}

/// Foreground where the raw eccentricity strictly exceeds
/// `alpha (m^2 + 1) / 2`. On the normalized scale this is the same as
/// `e > alpha (m^2 - 1) / (2 (1 - alpha))`.
pub fn foreground_mask(xi: &Raster<f64>, params: &EccParams) -> Mask {
    let threshold = params.finite_threshold();
    xi.map(|v| u8::from(v > threshold))
}

/// Scales `[0, 1]` to `0..=255`, rounding halves up.
pub fn quantize_map(map: &Raster<f64>) -> Result<Raster<u8>, EngineError> {
    if let Some(&bad) = map.as_slice().iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(EngineError::OutOfRange(bad));
    }
    Ok(map.map(quantize_value))
}

#[inline]
fn quantize_value(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor() as u8
}
