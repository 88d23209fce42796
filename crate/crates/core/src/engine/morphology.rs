//! Binary morphology with a square structuring element of side `2r + 1`.
//!
//! Pixels outside the raster are background. Closing is evaluated as if the
//! mask sat on an unbounded background plane and then cropped, so the dilated
//! band beyond the border is still available to the erosion. This keeps
//! closing extensive: it never removes a foreground pixel, including at the
//! image border.

use crate::raster::Mask;

/// Sets every pixel that has a foreground pixel within Chebyshev distance `r`.
pub fn dilate(mask: &Mask, radius: usize) -> Mask {
    let (h, w) = mask.dims();
    let mut out = mask.clone();
    square_filter(out.as_mut_slice(), h, w, radius, Op::Dilate);
    out
}

/// Keeps pixels whose whole `(2r+1)^2` neighbourhood is in bounds and set.
pub fn erode(mask: &Mask, radius: usize) -> Mask {
    let (h, w) = mask.dims();
    let mut out = mask.clone();
    square_filter(out.as_mut_slice(), h, w, radius, Op::Erode);
    out
}

/// Dilation followed by erosion. Radius 0 returns the input unchanged.
pub fn binary_closing(mask: &Mask, radius: usize) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let (ph, pw) = (h + 2 * radius, w + 2 * radius);
    let mut canvas = vec![0u8; ph * pw];
    for row in 0..h {
        let src = &mask.as_slice()[row * w..(row + 1) * w];
        let dst = &mut canvas[(row + radius) * pw + radius..][..w];
        dst.copy_from_slice(src);
    }
    square_filter(&mut canvas, ph, pw, radius, Op::Dilate);
    square_filter(&mut canvas, ph, pw, radius, Op::Erode);

    let mut out = Mask::filled(h, w, 0);
    for row in 0..h {
        let src = &canvas[(row + radius) * pw + radius..][..w];
        out.as_mut_slice()[row * w..(row + 1) * w].copy_from_slice(src);
    }
    out
}

#[derive(Clone, Copy)]
enum Op {
    Dilate,
    Erode,
}

/// Separable square filter: rows, then columns.
fn square_filter(data: &mut [u8], h: usize, w: usize, radius: usize, op: Op) {
    if radius == 0 || h == 0 || w == 0 {
        return;
    }
    let mut line = Vec::with_capacity(h.max(w));
    for row in 0..h {
        line.clear();
        line.extend_from_slice(&data[row * w..(row + 1) * w]);
        filter_line(&line, radius, op, |i, v| data[row * w + i] = v);
    }
    for col in 0..w {
        line.clear();
        line.extend((0..h).map(|row| data[row * w + col]));
        filter_line(&line, radius, op, |i, v| data[i * w + col] = v);
    }
}

/// Sliding-window count of set pixels; out-of-range positions count as unset.
fn filter_line(line: &[u8], radius: usize, op: Op, mut put: impl FnMut(usize, u8)) {
    let n = line.len();
    let full = 2 * radius + 1;
    let mut ones: usize = line[..radius.min(n)].iter().filter(|&&v| v != 0).count();
    for i in 0..n {
        let enter = i + radius;
        if enter < n && line[enter] != 0 {
            ones += 1;
        }
        if i > radius && line[i - radius - 1] != 0 {
            ones -= 1;
        }
        let v = match op {
            Op::Dilate => ones > 0,
            Op::Erode => ones == full,
        };
        put(i, u8::from(v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &Mask) -> Vec<Vec<u8>> {
        m.as_slice().chunks(m.width()).map(|r| r.to_vec()).collect()
    }

    /// Direct definition: max/min over the square, out of bounds = 0.
    fn brute(mask: &Mask, r: usize, dilate: bool) -> Mask {
        let (h, w) = mask.dims();
        let r = r as isize;
        let mut out = Mask::filled(h, w, 0);
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut any = false;
                let mut all = true;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (yy, xx) = (y + dy, x + dx);
                        let v = yy >= 0
                            && xx >= 0
                            && yy < h as isize
                            && xx < w as isize
                            && mask.get(yy as usize, xx as usize) != 0;
                        any |= v;
                        all &= v;
                    }
                }
                out.set(y as usize, x as usize, u8::from(if dilate { any } else { all }));
            }
        }
        out
    }

    #[test]
    fn fills_hole_in_block() {
        let mut m = Mask::filled(7, 7, 0);
        for y in 1..6 {
            for x in 1..6 {
                m.set(y, x, 1);
            }
        }
        m.set(3, 3, 0);
        let closed = binary_closing(&m, 1);
        assert_eq!(closed.get(3, 3), 1);
        assert_eq!(closed.count_ones(), 25);
    }

    #[test]
    fn empty_stays_empty() {
        let m = Mask::filled(6, 9, 0);
        assert_eq!(binary_closing(&m, 2), m);
    }

    #[test]
    fn radius_zero_is_identity() {
        let m = Mask::from_rows(&[&[1, 0, 1], &[0, 1, 0]]);
        assert_eq!(binary_closing(&m, 0), m);
    }

    #[test]
    fn bridges_gap_4x4() {
        let m = Mask::from_rows(&[&[0, 0, 0, 0], &[1, 1, 0, 1], &[1, 1, 0, 1], &[0, 0, 0, 0]]);
        // inside the raster every pixel has a set pixel within distance 1
        assert_eq!(rows(&dilate(&m, 1)), vec![vec![1; 4]; 4]);
        // on the padded plane rows -1 and 4 stay clear after dilation, so the
        // erosion clears rows 0 and 3 and keeps rows 1 and 2
        let closed = binary_closing(&m, 1);
        assert_eq!(
            rows(&closed),
            vec![vec![0, 0, 0, 0], vec![1, 1, 1, 1], vec![1, 1, 1, 1], vec![0, 0, 0, 0]]
        );
    }

    #[test]
    fn border_foreground_survives() {
        let m = Mask::from_rows(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 0]]);
        assert_eq!(binary_closing(&m, 1), m);
    }

    #[test]
    fn separable_matches_definition() {
        let m = Mask::from_rows(&[
            &[0, 1, 0, 0, 1, 1, 0],
            &[1, 1, 1, 0, 0, 1, 0],
            &[0, 0, 1, 1, 0, 0, 0],
            &[1, 0, 0, 1, 1, 1, 1],
            &[1, 1, 0, 0, 0, 1, 0],
        ]);
        for r in 1..4 {
            assert_eq!(dilate(&m, r), brute(&m, r, true), "dilate r={r}");
            assert_eq!(erode(&m, r), brute(&m, r, false), "erode r={r}");
        }
    }
}
