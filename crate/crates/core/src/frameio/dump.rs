//! `ECCM` float dumps: a sequence of records, each a 22-byte little-endian
//! header followed by `width * height` little-endian `f32` values, row-major.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "ECCM"
//!      4     2  version (u16)
//!      6     4  width (u32)
//!     10     4  height (u32)
//!     14     8  frame_index (u64)
//!     22  4*w*h payload
//! ```

use std::io::{self, Read, Write};

use super::FrameError;
use crate::raster::Raster;

pub const ECCM_MAGIC: [u8; 4] = *b"ECCM";
pub const ECCM_VERSION: u16 = 1;
pub const ECCM_HEADER_LEN: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FloatDumpHeader {
    pub version: u16,
    pub width: u32,
    pub height: u32,
    pub frame_index: u64,
}

impl FloatDumpHeader {
    pub fn payload_len(&self) -> usize {
        4 * self.width as usize * self.height as usize
    }

    pub fn to_bytes(&self) -> [u8; ECCM_HEADER_LEN] {
        let mut b = [0u8; ECCM_HEADER_LEN];
        b[0..4].copy_from_slice(&ECCM_MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6..10].copy_from_slice(&self.width.to_le_bytes());
        b[10..14].copy_from_slice(&self.height.to_le_bytes());
        b[14..22].copy_from_slice(&self.frame_index.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; ECCM_HEADER_LEN]) -> Result<Self, FrameError> {
        if b[0..4] != ECCM_MAGIC {
            return Err(FrameError::Dump("bad magic".into()));
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != ECCM_VERSION {
            return Err(FrameError::Dump(format!("unsupported version {version}")));
        }
        Ok(Self {
            version,
            width: u32::from_le_bytes(b[6..10].try_into().expect("4 bytes")),
            height: u32::from_le_bytes(b[10..14].try_into().expect("4 bytes")),
            frame_index: u64::from_le_bytes(b[14..22].try_into().expect("8 bytes")),
        })
    }
}

/// Appends one record; values are narrowed to `f32`.
pub fn write_record<W: Write>(w: &mut W, frame_index: u64, map: &Raster<f64>) -> io::Result<()> {
    let values: Vec<f32> = map.as_slice().iter().map(|&v| v as f32).collect();
    write_record_f32(w, frame_index, map.width(), map.height(), &values)
}

pub fn write_record_f32<W: Write>(
    w: &mut W,
    frame_index: u64,
    width: usize,
    height: usize,
    values: &[f32],
) -> io::Result<()> {
    assert_eq!(values.len(), width * height, "payload size");
    let header = FloatDumpHeader {
        version: ECCM_VERSION,
        width: u32::try_from(width).expect("width fits u32"),
        height: u32::try_from(height).expect("height fits u32"),
        frame_index,
    };
    let mut buf = Vec::with_capacity(ECCM_HEADER_LEN + 4 * values.len());
    buf.extend_from_slice(&header.to_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

/// Reads the next record, `Ok(None)` at a clean end of input.
pub fn read_record<R: Read>(r: &mut R) -> Result<Option<(FloatDumpHeader, Vec<f32>)>, FrameError> {
    let mut head = [0u8; ECCM_HEADER_LEN];
    let mut filled = 0;
    while filled < head.len() {
        match r.read(&mut head[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(FrameError::Dump("truncated header".into())),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(FrameError::Dump(e.to_string())),
        }
    }
    let header = FloatDumpHeader::from_bytes(&head)?;
    let mut payload = vec![0u8; header.payload_len()];
    r.read_exact(&mut payload)
        .map_err(|_| FrameError::Dump(format!("truncated payload in frame {}", header.frame_index)))?;
    let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    Ok(Some((header, values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_record_f32(&mut buf, 7, 2, 1, &[1.0, -0.5]).unwrap();
        assert_eq!(buf.len(), 22 + 8);
        assert_eq!(&buf[..4], b"ECCM");
        assert_eq!(&buf[4..6], &[1, 0]);
        assert_eq!(&buf[6..10], &[2, 0, 0, 0]);
        assert_eq!(&buf[10..14], &[1, 0, 0, 0]);
        assert_eq!(&buf[14..22], &[7, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&buf[22..26], &1.0f32.to_le_bytes());
    }

    #[test]
    fn rejects_garbage() {
        let mut bad = &b"ECCN\x01\x00\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00abcd"[..];
        assert!(read_record(&mut bad).is_err());
        let mut short = &b"ECCM\x01\x00"[..];
        assert!(read_record(&mut short).is_err());
        let mut empty = &b""[..];
        assert!(read_record(&mut empty).unwrap().is_none());
    }

    proptest! {
        #[test]
        fn records_round_trip_bit_exact(
            bits in proptest::collection::vec(any::<u32>(), 1..64),
            index in any::<u64>(),
        ) {
            let values: Vec<f32> = bits.iter().map(|&b| f32::from_bits(b)).collect();
            let mut buf = Vec::new();
            write_record_f32(&mut buf, index, values.len(), 1, &values).unwrap();
            write_record_f32(&mut buf, index.wrapping_add(1), 1, values.len(), &values).unwrap();
            let mut r = &buf[..];
            for expected_index in [index, index.wrapping_add(1)] {
                let (h, got) = read_record(&mut r).unwrap().unwrap();
                prop_assert_eq!(h.frame_index, expected_index);
                let got_bits: Vec<u32> = got.iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(&got_bits, &bits);
            }
            prop_assert!(read_record(&mut r).unwrap().is_none());
        }
    }
}
