use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver};
use std::thread::JoinHandle;

use super::{pnm, FrameError};
use crate::frame::{Frame, FrameDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    /// Directory of numbered PGM/PPM (or PNG, with the `png` feature) files.
    ImageDir,
    /// Interleaved GRAY8 or RGB24 frames back to back.
    Raw,
    /// YUV4MPEG2, 8-bit `C444` or `Cmono` only.
    Y4m,
}

impl FromStr for SourceFormat {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dir" | "image-dir" | "images" => Ok(Self::ImageDir),
            "raw" => Ok(Self::Raw),
            "y4m" => Ok(Self::Y4m),
            other => Err(FrameError::Unsupported(format!("input format {other:?}; expected dir, raw or y4m"))),
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ImageDir => "dir",
            Self::Raw => "raw",
            Self::Y4m => "y4m",
        })
    }
}

enum Backend {
    Dir { files: Vec<(u64, PathBuf)> },
    Raw { reader: BufReader<File> },
    Y4m { reader: BufReader<File>, planes: usize },
}

/// Sequential reader over one frame stream.
pub struct FrameSource {
    path: PathBuf,
    kind: SourceFormat,
    dims: Option<FrameDims>,
    frame_count: Option<usize>,
    cursor: usize,
    backend: Backend,
}

impl fmt::Debug for FrameSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameSource")
            .field("path", &self.path)
            .field("kind", &self.kind)
            .field("dims", &self.dims)
            .field("frame_count", &self.frame_count)
            .field("cursor", &self.cursor)
            .finish()
    }
}

/// Opens a frame stream.
///
/// Without a hint the format is taken from the path: directories are image
/// sequences, `.y4m` files are Y4M and anything else is raw. Raw input needs
/// `raw_dims` or a sidecar file `<path>.dims` containing `AxBxC`.
pub fn open_source(
    path: &Path,
    hint: Option<SourceFormat>,
    raw_dims: Option<FrameDims>,
) -> Result<FrameSource, FrameError> {
    let kind = match hint {
        Some(k) => k,
        None if path.is_dir() => SourceFormat::ImageDir,
        None if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("y4m")) => SourceFormat::Y4m,
        None => SourceFormat::Raw,
    };
    match kind {
        SourceFormat::ImageDir => open_dir(path),
        SourceFormat::Raw => open_raw(path, raw_dims),
        SourceFormat::Y4m => open_y4m(path),
    }
}

impl FrameSource {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn kind(&self) -> SourceFormat {
        self.kind
    }

    /// `None` only for an empty stream.
    pub fn dims(&self) -> Option<FrameDims> {
        self.dims
    }

    pub fn frame_count(&self) -> Option<usize> {
        self.frame_count
    }

    /// Number of frames delivered so far.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Next frame, or `Ok(None)` at the end of the stream.
    pub fn read_frame(&mut self) -> Result<Option<Frame>, FrameError> {
        let Some(dims) = self.dims else {
            return Ok(None);
        };
        let position = self.cursor + 1;
        let frame = match &mut self.backend {
            Backend::Dir { files } => {
                let Some((index, file)) = files.get(self.cursor) else {
                    return Ok(None);
                };
                let (got, data) = read_image(file)?;
                if got != dims {
                    return Err(FrameError::InconsistentDims { path: file.clone(), expected: dims, got });
                }
                Frame::from_u8(*index, dims, &data)?
            }
            Backend::Raw { reader } => {
                let mut buf = vec![0u8; dims.samples()];
                match read_full(reader, &mut buf).map_err(|e| FrameError::io(&self.path, e))? {
                    0 => return Ok(None),
                    n if n < buf.len() => return Err(FrameError::Truncated { index: position as u64 }),
                    _ => {}
                }
                Frame::from_u8(position as u64, dims, &buf)?
            }
            Backend::Y4m { reader, planes } => {
                let mut line = Vec::new();
                let n = reader.read_until(b'\n', &mut line).map_err(|e| FrameError::io(&self.path, e))?;
                if n == 0 {
                    return Ok(None);
                }
                if !line.starts_with(b"FRAME") || line.last() != Some(&b'\n') {
                    return Err(FrameError::Truncated { index: position as u64 });
                }
                let plane_len = dims.pixels();
                let mut buf = vec![0u8; plane_len * *planes];
                let got = read_full(reader, &mut buf).map_err(|e| FrameError::io(&self.path, e))?;
                if got < buf.len() {
                    return Err(FrameError::Truncated { index: position as u64 });
                }
                // planar to interleaved; no colorspace conversion
                let mut data = vec![0u8; buf.len()];
                for (p, plane) in buf.chunks_exact(plane_len).enumerate() {
                    for (i, &v) in plane.iter().enumerate() {
                        data[i * *planes + p] = v;
                    }
                }
                Frame::from_u8(position as u64, dims, &data)?
            }
        };
        self.cursor += 1;
        Ok(Some(frame))
    }

    /// Moves reading onto a background thread with a bounded hand-off queue.
    pub fn prefetch(self, depth: usize) -> Prefetch {
        let (tx, rx) = mpsc::sync_channel(depth.max(1));
        let mut source = self;
        let handle = std::thread::Builder::new()
            .name("eccmap-reader".into())
            .spawn(move || loop {
                match source.read_frame() {
                    Ok(Some(frame)) => {
                        if tx.send(Ok(frame)).is_err() {
                            break;
                        }
                    }
                    Ok(None) => break,
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            })
            .expect("spawn reader thread");
        Prefetch { rx, handle: Some(handle) }
    }
}

impl Iterator for FrameSource {
    type Item = Result<Frame, FrameError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_frame().transpose()
    }
}

/// Frames read ahead on a separate thread; see [`FrameSource::prefetch`].
pub struct Prefetch {
    rx: Receiver<Result<Frame, FrameError>>,
    handle: Option<JoinHandle<()>>,
}

impl Iterator for Prefetch {
    type Item = Result<Frame, FrameError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.rx.recv() {
            Ok(item) => Some(item),
            Err(_) => {
                if let Some(h) = self.handle.take() {
                    let _ = h.join();
                }
                None
            }
        }
    }
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

fn is_image_file(path: &Path) -> bool {
    let Some(ext) = path.extension().and_then(|e| e.to_str()) else {
        return false;
    };
    let ext = ext.to_ascii_lowercase();
    matches!(ext.as_str(), "pgm" | "ppm" | "pnm") || (cfg!(feature = "png") && ext == "png")
}

/// Numeric index carried by a file name: the last run of digits in the stem.
pub fn filename_index(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let end = stem.rfind(|c: char| c.is_ascii_digit())? + 1;
    let start = stem[..end].rfind(|c: char| !c.is_ascii_digit()).map_or(0, |i| i + 1);
    stem[start..end].parse().ok()
}

/// Image files in `dir` ordered by their numeric index.
pub fn list_indexed_images(dir: &Path) -> Result<Vec<(u64, PathBuf)>, FrameError> {
    let entries = std::fs::read_dir(dir).map_err(|e| FrameError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| FrameError::io(dir, e))?.path();
        if path.is_file() && is_image_file(&path) {
            files.push(path);
        }
    }
    files.sort();
    let mut indexed: Vec<(u64, PathBuf)> = files
        .into_iter()
        .enumerate()
        .map(|(pos, p)| (filename_index(&p).unwrap_or(pos as u64 + 1), p))
        .collect();
    indexed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    if let Some(w) = indexed.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(FrameError::Format {
            path: w[1].1.clone(),
            msg: format!("duplicate frame index {} (also {})", w[0].0, w[0].1.display()),
        });
    }
    Ok(indexed)
}

fn image_dims(path: &Path) -> Result<FrameDims, FrameError> {
    #[cfg(feature = "png")]
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        return super::png_support::dims(path);
    }
    Ok(pnm::read_header(path)?.dims)
}

pub(crate) fn read_image(path: &Path) -> Result<(FrameDims, Vec<u8>), FrameError> {
    #[cfg(feature = "png")]
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        return super::png_support::read(path);
    }
    pnm::read(path)
}

fn open_dir(path: &Path) -> Result<FrameSource, FrameError> {
    let files = list_indexed_images(path)?;
    let mut dims = None;
    for (_, file) in &files {
        let got = image_dims(file)?;
        match dims {
            None => dims = Some(got),
            Some(expected) if expected != got => {
                return Err(FrameError::InconsistentDims { path: file.clone(), expected, got });
            }
            Some(_) => {}
        }
    }
    Ok(FrameSource {
        path: path.to_path_buf(),
        kind: SourceFormat::ImageDir,
        dims,
        frame_count: Some(files.len()),
        cursor: 0,
        backend: Backend::Dir { files },
    })
}

fn sidecar_dims(path: &Path) -> Result<Option<FrameDims>, FrameError> {
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".dims");
    let sidecar = PathBuf::from(sidecar);
    match std::fs::read_to_string(&sidecar) {
        Ok(text) => Ok(Some(text.trim().parse()?)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(FrameError::io(&sidecar, e)),
    }
}

fn open_raw(path: &Path, raw_dims: Option<FrameDims>) -> Result<FrameSource, FrameError> {
    let dims = match raw_dims {
        Some(d) => d,
        None => sidecar_dims(path)?.ok_or_else(|| FrameError::MissingRawDims(path.to_path_buf()))?,
    };
    let file = File::open(path).map_err(|e| FrameError::io(path, e))?;
    let len = file.metadata().map_err(|e| FrameError::io(path, e))?.len() as usize;
    Ok(FrameSource {
        path: path.to_path_buf(),
        kind: SourceFormat::Raw,
        dims: Some(dims),
        frame_count: Some(len / dims.samples()),
        cursor: 0,
        backend: Backend::Raw { reader: BufReader::new(file) },
    })
}

fn open_y4m(path: &Path) -> Result<FrameSource, FrameError> {
    let file = File::open(path).map_err(|e| FrameError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line).map_err(|e| FrameError::io(path, e))?;
    let bad = |msg: String| FrameError::Format { path: path.to_path_buf(), msg };
    let text = std::str::from_utf8(&line).map_err(|_| bad("header is not ASCII".into()))?.trim_end();
    let mut tokens = text.split(' ');
    if tokens.next() != Some("YUV4MPEG2") {
        return Err(bad("missing YUV4MPEG2 signature".into()));
    }
    let (mut width, mut height) = (None, None);
    // Y4M defaults to 4:2:0 when no colorspace tag is present.
    let mut chroma = "420jpeg";
    for tok in tokens.filter(|t| !t.is_empty()) {
        let (tag, value) = tok.split_at(1);
        match tag {
            "W" => width = value.parse::<usize>().ok(),
            "H" => height = value.parse::<usize>().ok(),
            "C" => chroma = value,
            _ => {}
        }
    }
    let (Some(width), Some(height)) = (width, height) else {
        return Err(bad("header lacks W/H".into()));
    };
    let planes = match chroma {
        "444" => 3,
        "mono" => 1,
        other => return Err(FrameError::Unsupported(format!("unsupported chroma C{other}; use C444 or convert"))),
    };
    let dims = FrameDims::new(height, width, planes)?;
    Ok(FrameSource {
        path: path.to_path_buf(),
        kind: SourceFormat::Y4m,
        dims: Some(dims),
        frame_count: None,
        cursor: 0,
        backend: Backend::Y4m { reader, planes },
    })
}
