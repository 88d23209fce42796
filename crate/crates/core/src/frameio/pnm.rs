//! Binary PGM (P5) and PPM (P6), maxval 255.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::FrameError;
use crate::frame::FrameDims;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PnmHeader {
    pub dims: FrameDims,
    /// Byte offset of the pixel data.
    pub data_offset: usize,
}

/// Parses the header; `bytes` may be just a prefix of the file.
pub fn parse_header(bytes: &[u8], path: &Path) -> Result<PnmHeader, FrameError> {
    let bad = |msg: &str| FrameError::Format { path: path.to_path_buf(), msg: msg.to_string() };
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some(_) => return Err(bad("not a binary PGM/PPM (expected P5 or P6)")),
        None => return Err(bad("file too short")),
    };

    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("expected a number in header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header number out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(bad("missing whitespace after maxval")),
    }

    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(FrameError::Unsupported(format!("{}: maxval {maxval}, only 255 is supported", path.display())));
    }
    let dims = FrameDims::new(height, width, channels).map_err(|e| bad(&e.to_string()))?;
    Ok(PnmHeader { dims, data_offset: pos })
}

/// Reads just enough of the file to parse the header.
pub fn read_header(path: &Path) -> Result<PnmHeader, FrameError> {
    let mut buf = Vec::with_capacity(512);
    File::open(path)
        .and_then(|f| f.take(4096).read_to_end(&mut buf))
        .map_err(|e| FrameError::io(path, e))?;
    parse_header(&buf, path)
}

/// Reads a whole image as interleaved 8-bit samples.
pub fn read(path: &Path) -> Result<(FrameDims, Vec<u8>), FrameError> {
    let bytes = std::fs::read(path).map_err(|e| FrameError::io(path, e))?;
    let header = parse_header(&bytes, path)?;
    let need = header.dims.samples();
    let data = bytes
        .get(header.data_offset..header.data_offset + need)
        .ok_or_else(|| FrameError::Format {
            path: path.to_path_buf(),
            msg: format!("expected {need} bytes of pixel data"),
        })?;
    Ok((header.dims, data.to_vec()))
}

pub fn encode(width: usize, height: usize, channels: usize, data: &[u8]) -> Vec<u8> {
    assert_eq!(data.len(), width * height * channels, "pixel buffer size");
    let magic = if channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

pub fn write(path: &Path, width: usize, height: usize, channels: usize, data: &[u8]) -> Result<(), FrameError> {
    let bytes = encode(width, height, channels, data);
    let mut f = BufWriter::new(File::create(path).map_err(|e| FrameError::io(path, e))?);
    f.write_all(&bytes).and_then(|_| f.flush()).map_err(|e| FrameError::io(path, e))
}
