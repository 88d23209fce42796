//! Frames as delivered to the engine.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameShapeError {
    #[error("frame dimensions must be non-zero, got {0}")]
    ZeroDimension(FrameDims),
    #[error("unsupported channel count {0}; expected 1 or 3")]
    Channels(usize),
    #[error("frame data has {got} values, expected {expected} for {dims}")]
    Length { dims: FrameDims, expected: usize, got: usize },
    #[error("intensity {value} at offset {offset} is outside [0, 255]")]
    Intensity { offset: usize, value: String },
    #[error("cannot parse dimensions {0:?}; expected HEIGHTxWIDTHxCHANNELS")]
    Parse(String),
}

/// Height `a`, width `b` and channel count `c` of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameDims {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl FrameDims {
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self, FrameShapeError> {
        let dims = Self { height, width, channels };
        if height == 0 || width == 0 || channels == 0 {
            return Err(FrameShapeError::ZeroDimension(dims));
        }
        if channels != 1 && channels != 3 {
            return Err(FrameShapeError::Channels(channels));
        }
        Ok(dims)
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn samples(&self) -> usize {
        self.pixels() * self.channels
    }
}

impl fmt::Display for FrameDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

impl FromStr for FrameDims {
    type Err = FrameShapeError;

    /// Parses `AxBxC` (height x width x channels).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(['x', 'X', '×']).collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(FrameShapeError::Parse(s.to_string()));
        };
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| FrameShapeError::Parse(s.to_string()));
        Self::new(parse(a)?, parse(b)?, parse(c)?)
    }
}

/// Borrowed frame: row-major, channel-interleaved intensities.
#[derive(Debug, Clone, Copy)]
pub struct FrameView<'a> {
    dims: FrameDims,
    data: &'a [f64],
}

impl<'a> FrameView<'a> {
    /// Checks the length and that every intensity lies in `[0, 255]`.
    pub fn new(dims: FrameDims, data: &'a [f64]) -> Result<Self, FrameShapeError> {
        let dims = FrameDims::new(dims.height, dims.width, dims.channels)?;
        if data.len() != dims.samples() {
            return Err(FrameShapeError::Length { dims, expected: dims.samples(), got: data.len() });
        }
        if let Some((offset, v)) = data.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 255.0)) {
            return Err(FrameShapeError::Intensity { offset, value: v.to_string() });
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> FrameDims {
        self.dims
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }
}

/// Owned frame with its position in the source stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    index: u64,
    dims: FrameDims,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(index: u64, dims: FrameDims, data: Vec<f64>) -> Result<Self, FrameShapeError> {
        FrameView::new(dims, &data)?;
        Ok(Self { index, dims, data })
    }

    /// Widens 8-bit samples; always in range.
    pub fn from_u8(index: u64, dims: FrameDims, bytes: &[u8]) -> Result<Self, FrameShapeError> {
        let dims = FrameDims::new(dims.height, dims.width, dims.channels)?;
        if bytes.len() != dims.samples() {
            return Err(FrameShapeError::Length { dims, expected: dims.samples(), got: bytes.len() });
        }
        Ok(Self { index, dims, data: bytes.iter().map(|&b| f64::from(b)).collect() })
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn dims(&self) -> FrameDims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn view(&self) -> FrameView<'_> {
        FrameView { dims: self.dims, data: &self.data }
    }
}
