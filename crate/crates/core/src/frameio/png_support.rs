use std::path::Path;

use super::FrameError;
use crate::frame::FrameDims;

pub(crate) fn dims(path: &Path) -> Result<FrameDims, FrameError> {
    let (dims, _) = read(path)?;
    Ok(dims)
}

/// Grayscale PNGs give one channel, everything else is converted to RGB8.
pub(crate) fn read(path: &Path) -> Result<(FrameDims, Vec<u8>), FrameError> {
    let img = image::open(path).map_err(|e| FrameError::Format { path: path.to_path_buf(), msg: e.to_string() })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, data) = match img.color().channel_count() {
        1 | 2 => (1, img.into_luma8().into_raw()),
        _ => (3, img.into_rgb8().into_raw()),
    };
    Ok((FrameDims::new(h, w, channels)?, data))
}
