//! Frame sources, map sinks and ground-truth masks.
//!
//! Images are binary PGM/PPM with maxval 255. Video must be pre-extracted to
//! an image directory, a raw GRAY8/RGB24 file or an 8-bit Y4M (C444 or mono).

pub mod dump;
#[cfg(feature = "png")]
mod png_support;
pub mod pnm;
mod source;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use dump::{read_record, write_record, FloatDumpHeader, ECCM_MAGIC, ECCM_VERSION};
pub use source::{filename_index, list_indexed_images, open_source, FrameSource, Prefetch, SourceFormat};

use crate::engine::{quantize_map, EngineError, MapBundle, MapKind};
use crate::frame::{FrameDims, FrameShapeError};
use crate::raster::{Mask, Raster};

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("{0}")]
    Unsupported(String),
    #[error("{}: frame is {got}, expected {expected}", path.display())]
    InconsistentDims { path: PathBuf, expected: FrameDims, got: FrameDims },
    #[error("truncated frame {index}")]
    Truncated { index: u64 },
    #[error("{}: raw input needs dimensions; pass --raw-dims AxBxC or add a .dims sidecar", .0.display())]
    MissingRawDims(PathBuf),
    #[error("{}: mask is {}x{}, predictions are {}x{}", path.display(), got.0, got.1, expected.0, expected.1)]
    MaskDims { path: PathBuf, expected: (usize, usize), got: (usize, usize) },
    #[error("float dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Shape(#[from] FrameShapeError),
    #[error(transparent)]
    Map(#[from] EngineError),
}

impl FrameError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

/// 8-bit rendering of one map: continuous maps are quantized, the mask is
/// written as 0/255.
pub fn render_map(bundle: &MapBundle, kind: MapKind) -> Result<Raster<u8>, FrameError> {
    match bundle.scalar_map(kind) {
        Some(map) => Ok(quantize_map(map)?),
        None => Ok(bundle.fg.map(|v| if v != 0 { 255 } else { 0 })),
    }
}

/// Writes one map of `bundle` as a binary PGM.
pub fn write_map_image(bundle: &MapBundle, kind: MapKind, path: &Path) -> Result<(), FrameError> {
    let img = render_map(bundle, kind)?;
    pnm::write(path, img.width(), img.height(), 1, img.as_slice())
}

/// Loads a ground-truth mask. Pixels above 127 are foreground; colour images
/// are reduced to the mean of their channels first.
pub fn load_truth_mask(path: &Path, expected: Option<(usize, usize)>) -> Result<Mask, FrameError> {
    let (dims, data) = source::read_image(path)?;
    let gray: Vec<u8> = if dims.channels == 1 {
        data
    } else {
        data.chunks_exact(dims.channels)
            .map(|px| (px.iter().map(|&v| u32::from(v)).sum::<u32>() / dims.channels as u32) as u8)
            .collect()
    };
    if let Some(expected) = expected {
        if expected != (dims.height, dims.width) {
            return Err(FrameError::MaskDims { path: path.to_path_buf(), expected, got: (dims.height, dims.width) });
        }
    }
    let bits = gray.into_iter().map(|v| u8::from(v > 127)).collect();
    Ok(Mask::from_vec(dims.height, dims.width, bits).expect("size checked by reader"))
}
