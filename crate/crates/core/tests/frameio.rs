use std::fs;
use std::io::Cursor;
use std::path::Path;

use eccmap::engine::Pipeline;
use eccmap::frameio::{self, open_source, pnm, read_record, write_record, FrameError, SourceFormat};
use eccmap::synth::noise_stream;
use eccmap::{EccParams, FrameDims, MapKind, Raster};

fn write_ppm_dir(dir: &Path, frames: &[Vec<u8>], dims: FrameDims, first: u64) {
    for (i, data) in frames.iter().enumerate() {
        let name = format!("in{:06}.{}", first + i as u64, if dims.channels == 1 { "pgm" } else { "ppm" });
        pnm::write(&dir.join(name), dims.width, dims.height, dims.channels, data).unwrap();
    }
}

fn ramp(n: usize, seed: u8) -> Vec<u8> {
    (0..n).map(|i| (i as u8).wrapping_mul(7).wrapping_add(seed)).collect()
}

#[test]
fn image_dir_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dims = FrameDims::new(3, 5, 3).unwrap();
    let frames: Vec<_> = (0..4).map(|s| ramp(dims.samples(), s)).collect();
    write_ppm_dir(tmp.path(), &frames, dims, 10);

    let src = open_source(tmp.path(), None, None).unwrap();
    assert_eq!(src.kind(), SourceFormat::ImageDir);
    assert_eq!(src.dims(), Some(dims));
    let read: Vec<_> = src.collect::<Result<_, _>>().unwrap();
    assert_eq!(read.len(), 4);
    for (i, f) in read.iter().enumerate() {
        assert_eq!(f.index(), 10 + i as u64);
        let bytes: Vec<u8> = f.data().iter().map(|&v| v as u8).collect();
        assert_eq!(bytes, frames[i]);
    }
}

#[test]
fn prefetch_matches_direct_reading() {
    let tmp = tempfile::tempdir().unwrap();
    let dims = FrameDims::new(4, 4, 1).unwrap();
    let frames: Vec<_> = (0..9).map(|s| ramp(dims.samples(), s * 3)).collect();
    write_ppm_dir(tmp.path(), &frames, dims, 1);
    let direct: Vec<_> = open_source(tmp.path(), None, None).unwrap().collect::<Result<_, _>>().unwrap();
    let ahead: Vec<_> =
        open_source(tmp.path(), None, None).unwrap().prefetch(2).collect::<Result<Vec<_>, _>>().unwrap();
    assert_eq!(direct, ahead);
}

#[test]
fn mixed_dimensions_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    pnm::write(&tmp.path().join("a1.pgm"), 2, 2, 1, &[0; 4]).unwrap();
    pnm::write(&tmp.path().join("a2.pgm"), 3, 2, 1, &[0; 6]).unwrap();
    assert!(open_source(tmp.path(), None, None).is_err());
}

#[test]
fn empty_directory_is_an_empty_stream() {
    let tmp = tempfile::tempdir().unwrap();
    let mut src = open_source(tmp.path(), None, None).unwrap();
    assert_eq!(src.dims(), None);
    assert!(src.read_frame().unwrap().is_none());
}

#[test]
fn raw_needs_dims() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("clip.raw");
    fs::write(&path, [0u8; 12]).unwrap();
    let err = open_source(&path, None, None).unwrap_err();
    assert!(matches!(err, FrameError::MissingRawDims(_)));
    assert!(err.to_string().contains("--raw-dims"));

    fs::write(tmp.path().join("clip.raw.dims"), "2x2x3\n").unwrap();
    let frames: Vec<_> = open_source(&path, None, None).unwrap().collect::<Result<_, _>>().unwrap();
    assert_eq!(frames.len(), 1);
    assert_eq!(frames[0].dims(), FrameDims::new(2, 2, 3).unwrap());
}

#[test]
fn raw_truncated_tail() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("clip.bin");
    fs::write(&path, [9u8; 4 * 2 + 3]).unwrap();
    let dims = FrameDims::new(2, 2, 1).unwrap();
    let mut src = open_source(&path, Some(SourceFormat::Raw), Some(dims)).unwrap();
    assert!(src.read_frame().unwrap().is_some());
    assert!(src.read_frame().unwrap().is_some());
    assert!(matches!(src.read_frame(), Err(FrameError::Truncated { index: 3 })));
}

fn y4m_bytes(header: &str, frames: &[Vec<u8>]) -> Vec<u8> {
    let mut out = format!("{header}\n").into_bytes();
    for f in frames {
        out.extend_from_slice(b"FRAME\n");
        out.extend_from_slice(f);
    }
    out
}

#[test]
fn y4m_444_is_interleaved() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("clip.y4m");
    // 2x1 frame: Y plane [1,2], U plane [3,4], V plane [5,6]
    fs::write(&path, y4m_bytes("YUV4MPEG2 W2 H1 F25:1 Ip A1:1 C444", &[vec![1, 2, 3, 4, 5, 6]])).unwrap();
    let frames: Vec<_> = open_source(&path, None, None).unwrap().collect::<Result<_, _>>().unwrap();
    assert_eq!(frames.len(), 1);
    assert_eq!(frames[0].data(), &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
}

#[test]
fn y4m_mono() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("m.y4m");
    fs::write(&path, y4m_bytes("YUV4MPEG2 W2 H2 Cmono", &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]])).unwrap();
    let frames: Vec<_> = open_source(&path, None, None).unwrap().collect::<Result<_, _>>().unwrap();
    assert_eq!(frames.len(), 2);
    assert_eq!(frames[1].dims().channels, 1);
    assert_eq!(frames[1].data(), &[4.0, 5.0, 6.0, 7.0]);
}

#[test]
fn y4m_subsampled_chroma_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    for header in ["YUV4MPEG2 W2 H2 C420jpeg", "YUV4MPEG2 W2 H2"] {
        let path = tmp.path().join("c.y4m");
        fs::write(&path, y4m_bytes(header, &[vec![0; 6]])).unwrap();
        let err = open_source(&path, None, None).unwrap_err();
        assert!(matches!(err, FrameError::Unsupported(_)), "{header}");
        assert!(err.to_string().contains("C444"));
    }
}

#[test]
fn truth_mask_dims_checked() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("gt.pgm");
    pnm::write(&path, 2, 2, 1, &[0, 128, 127, 255]).unwrap();
    let m = frameio::load_truth_mask(&path, Some((2, 2))).unwrap();
    assert_eq!(m.as_slice(), &[0, 1, 0, 1]);
    assert!(matches!(frameio::load_truth_mask(&path, Some((2, 3))), Err(FrameError::MaskDims { .. })));
}

#[test]
fn map_images_and_dumps_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let dims = FrameDims::new(6, 7, 3).unwrap();
    let frames = noise_stream(30, dims, 3);
    let mut pipeline = Pipeline::new(EccParams::default(), 0, 1).unwrap();

    let mut dump = Vec::new();
    for f in &frames {
        let b = pipeline.push(f).unwrap();
        write_record(&mut dump, f.index(), &b.e).unwrap();
        if f.index() == 30 {
            let path = tmp.path().join("e.pgm");
            frameio::write_map_image(b, MapKind::E, &path).unwrap();
            let (d, bytes) = pnm::read(&path).unwrap();
            assert_eq!((d.height, d.width, d.channels), (6, 7, 1));
            let expect: Vec<u8> = b.e.as_slice().iter().map(|&v| (v * 255.0 + 0.5).floor() as u8).collect();
            assert_eq!(bytes, expect);
        }
    }

    let mut cur = Cursor::new(dump);
    let mut count = 0;
    while let Some((h, payload)) = read_record(&mut cur).unwrap() {
        count += 1;
        assert_eq!(h.frame_index, count);
        assert_eq!((h.height, h.width), (6, 7));
        assert_eq!(payload.len(), 42);
    }
    assert_eq!(count, 30);
}

#[test]
fn dump_record_preserves_f32_values() {
    let r = Raster::from_vec(1, 3, vec![0.0, 0.1, 1.0]).unwrap();
    let mut buf = Vec::new();
    write_record(&mut buf, 7, &r).unwrap();
    assert_eq!(&buf[..4], b"ECCM");
    let (h, v) = read_record(&mut Cursor::new(buf)).unwrap().unwrap();
    assert_eq!(h.frame_index, 7);
    assert_eq!(v, vec![0.0f32, 0.1, 1.0]);
}
