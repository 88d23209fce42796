//! Seeded synthetic frame streams for benchmarks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::{Frame, FrameDims};

/// Textured static background with sensor noise of +-`noise` levels and a
/// bright square bouncing across the scene.
pub fn moving_square_stream(frames: usize, dims: FrameDims, noise: u8, seed: u64) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background: Vec<u8> = (0..dims.samples()).map(|_| rng.gen_range(30..=200)).collect();
    let side = (dims.height.min(dims.width) / 6).max(1);
    let noise = i16::from(noise);
    (0..frames)
        .map(|k| {
            let (top, left) = bounce(k, dims.height - side, dims.width - side);
            let mut data = Vec::with_capacity(dims.samples());
            for row in 0..dims.height {
                for col in 0..dims.width {
                    let inside = (top..top + side).contains(&row) && (left..left + side).contains(&col);
                    for ch in 0..dims.channels {
                        let base = if inside { 250 } else { background[(row * dims.width + col) * dims.channels + ch] };
                        let jitter = if noise > 0 { rng.gen_range(-noise..=noise) } else { 0 };
                        data.push((i16::from(base) + jitter).clamp(0, 255) as u8);
                    }
                }
            }
            Frame::from_u8(k as u64 + 1, dims, &data).expect("dims are consistent")
        })
        .collect()
}

/// Independent uniform noise in `0..=255` for every sample.
pub fn noise_stream(frames: usize, dims: FrameDims, seed: u64) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..frames)
        .map(|k| {
            let data: Vec<u8> = (0..dims.samples()).map(|_| rng.gen()).collect();
            Frame::from_u8(k as u64 + 1, dims, &data).expect("dims are consistent")
        })
        .collect()
}

fn bounce(k: usize, max_row: usize, max_col: usize) -> (usize, usize) {
    let tri = |t: usize, span: usize| {
        if span == 0 {
            return 0;
        }
        let p = t % (2 * span);
        if p <= span { p } else { 2 * span - p }
    };
    (tri(k, max_row), tri(2 * k, max_col))
}
