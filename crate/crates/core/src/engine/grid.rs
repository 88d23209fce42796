use rayon::prelude::*;

use super::morphology::binary_closing;
use super::{EngineError, MapBundle};
use crate::ecc::{finite_step_in_place, EccParams, StreamState};
use crate::frame::{FrameDims, FrameView};

/// How a frame is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    /// Closing radius applied to the foreground mask; 0 disables closing.
    pub closing_radius: usize,
    /// Number of row bands. Bands run on the current rayon pool when > 1.
    pub workers: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { closing_radius: 0, workers: 1 }
    }
}

/// Per-pixel running statistics for one stream, one plane per statistic.
#[derive(Debug, Clone)]
pub struct StateGrid {
    dims: FrameDims,
    means: Vec<Vec<f64>>,
    variance: Vec<f64>,
    frames_seen: u64,
}

impl StateGrid {
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self, EngineError> {
        let dims = FrameDims::new(height, width, channels)?;
        Ok(Self {
            dims,
            means: vec![vec![0.0; dims.pixels()]; channels],
            variance: vec![0.0; dims.pixels()],
            frames_seen: 0,
        })
    }

    pub fn dims(&self) -> FrameDims {
        self.dims
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn variance_plane(&self) -> &[f64] {
        &self.variance
    }

    pub fn mean_plane(&self, channel: usize) -> &[f64] {
        &self.means[channel]
    }

    /// Statistics of a single pixel as a standalone stream state.
    pub fn pixel_state(&self, row: usize, col: usize) -> StreamState {
        let i = row * self.dims.width + col;
        let mean = self.means.iter().map(|p| p[i]).collect();
        StreamState::from_parts(mean, self.variance[i], self.frames_seen).expect("variance plane is non-negative")
    }

    /// Sequential ingest without closing.
    pub fn ingest_frame(&mut self, frame: FrameView<'_>, params: &EccParams) -> Result<MapBundle, EngineError> {
        let mut out = MapBundle::new(self.dims.height, self.dims.width);
        self.ingest_into(frame, params, &IngestOptions::default(), &mut out)?;
        Ok(out)
    }

    /// Advances every pixel by one frame and writes all maps into `out`.
    ///
    /// Pixels share no state, so the result does not depend on
    /// `options.workers`.
    pub fn ingest_into(
        &mut self,
        frame: FrameView<'_>,
        params: &EccParams,
        options: &IngestOptions,
        out: &mut MapBundle,
    ) -> Result<(), EngineError> {
        if frame.dims() != self.dims {
            return Err(EngineError::DimensionMismatch { expected: self.dims, got: frame.dims() });
        }
        if out.dims() != (self.dims.height, self.dims.width) {
            *out = MapBundle::new(self.dims.height, self.dims.width);
        }

        let first = self.frames_seen == 0;
        self.frames_seen += 1;
        let fg_enabled = self.frames_seen > params.warmup();

        let (h, w, c) = (self.dims.height, self.dims.width, self.dims.channels);
        let workers = options.workers.clamp(1, h);
        let band_px = h.div_ceil(workers) * w;

        let mut mean_chunks: Vec<_> = self.means.iter_mut().map(|p| p.chunks_mut(band_px)).collect();
        let mut bands = Vec::with_capacity(workers);
        let outputs = self
            .variance
            .chunks_mut(band_px)
            .zip(frame.data().chunks(band_px * c))
            .zip(out.xi.as_mut_slice().chunks_mut(band_px))
            .zip(out.e.as_mut_slice().chunks_mut(band_px))
            .zip(out.e_pos.as_mut_slice().chunks_mut(band_px))
            .zip(out.e_neg.as_mut_slice().chunks_mut(band_px))
            .zip(out.e_signed.as_mut_slice().chunks_mut(band_px))
            .zip(out.fg.as_mut_slice().chunks_mut(band_px));
        for (((((((variance, pixels), xi), e), pos), neg), signed), fg) in outputs {
            let means = mean_chunks.iter_mut().map(|it| it.next().expect("planes share length")).collect();
            bands.push(Band { pixels, means, variance, xi, e, pos, neg, signed, fg });
        }

        let sweep = |band: Band<'_>| match c {
            1 => sweep::<1>(band, params, first, fg_enabled),
            3 => sweep::<3>(band, params, first, fg_enabled),
            _ => unreachable!("channel count validated at construction"),
        };
        if bands.len() == 1 {
            bands.into_iter().for_each(sweep);
        } else {
            bands.into_par_iter().for_each(sweep);
        }

        if fg_enabled && options.closing_radius > 0 {
            out.fg = binary_closing(&out.fg, options.closing_radius);
        }
        out.frame_index = self.frames_seen;
        Ok(())
    }
}

struct Band<'a> {
    pixels: &'a [f64],
    means: Vec<&'a mut [f64]>,
    variance: &'a mut [f64],
    xi: &'a mut [f64],
    e: &'a mut [f64],
    pos: &'a mut [f64],
    neg: &'a mut [f64],
    signed: &'a mut [f64],
    fg: &'a mut [u8],
}

fn sweep<const C: usize>(band: Band<'_>, params: &EccParams, first: bool, fg_enabled: bool) {
    let threshold = params.finite_threshold();
    let Ok(means) = <[&mut [f64]; C]>::try_from(band.means) else {
        unreachable!("band has one mean plane per channel")
    };
    for (i, variance) in band.variance.iter_mut().enumerate() {
        let x: [f64; C] = std::array::from_fn(|ch| band.pixels[i * C + ch]);
        let mut mean: [f64; C] = std::array::from_fn(|ch| means[ch][i]);
        let v = finite_step_in_place(&mut mean, variance, first, &x, params);
        for ch in 0..C {
            means[ch][i] = mean[ch];
        }
        band.xi[i] = v.xi;
        band.e[i] = v.eps;
        band.pos[i] = v.eps_pos;
        band.neg[i] = v.eps_neg;
        band.signed[i] = v.eps_signed;
        band.fg[i] = u8::from(fg_enabled && v.xi > threshold);
    }
}
