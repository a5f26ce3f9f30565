//! Windowed sums over a symmetrically reflected image, via integral images.

use super::GrayImage;

/// Symmetric (edge-repeating) reflection of index `i` into `0..n`.
/// Periodic with period `2n`, so any offset is valid.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Offset of the first window element relative to the pixel it belongs to.
/// Odd windows are centered; even windows have one more element after the pixel.
#[inline]
pub(crate) fn window_start(size: usize) -> isize {
    -(((size - 1) / 2) as isize)
}

/// Exact per-pixel window sums of values and squared values.
pub(crate) struct LocalSums {
    pub count: u64,
    pub sum: Vec<u64>,
    pub sum_sq: Vec<u64>,
}

impl LocalSums {
    pub fn compute(img: &GrayImage, window_w: usize, window_h: usize) -> Self {
        let (w, h) = (img.width(), img.height());
        let pw = w + window_w - 1;
        let ph = h + window_h - 1;
        let x0 = window_start(window_w);
        let y0 = window_start(window_h);
        let col_idx: Vec<usize> = (0..pw).map(|i| reflect(i as isize + x0, w)).collect();

        // integral images with a zero row/column in front
        let stride = pw + 1;
        let mut s1 = vec![0u64; stride * (ph + 1)];
        let mut s2 = vec![0u64; stride * (ph + 1)];
        for py in 0..ph {
            let row = img.row(reflect(py as isize + y0, h));
            let (mut r1, mut r2) = (0u64, 0u64);
            for px in 0..pw {
                let v = row[col_idx[px]] as u64;
                r1 += v;
                r2 += v * v;
                let at = (py + 1) * stride + px + 1;
                s1[at] = s1[at - stride] + r1;
                s2[at] = s2[at - stride] + r2;
            }
        }

        let mut sum = Vec::with_capacity(w * h);
        let mut sum_sq = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let (a, b) = (y * stride + x, y * stride + x + window_w);
                let (c, d) = ((y + window_h) * stride + x, (y + window_h) * stride + x + window_w);
                sum.push(s1[d] + s1[a] - s1[b] - s1[c]);
                sum_sq.push(s2[d] + s2[a] - s2[b] - s2[c]);
            }
        }
        LocalSums { count: (window_w * window_h) as u64, sum, sum_sq }
    }

    #[inline]
    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] as f64 / self.count as f64
    }

    /// Population variance, from exact integer moments.
    #[inline]
    pub fn variance(&self, i: usize) -> f64 {
        let n = self.count as u128;
        let s = self.sum[i] as u128;
        let num = n * self.sum_sq[i] as u128 - s * s;
        num as f64 / (n * n) as f64
    }

    pub fn len(&self) -> usize {
        self.sum.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_is_symmetric_and_periodic() {
        let n = 4;
        let got: Vec<usize> = (-5..9).map(|i| reflect(i, n)).collect();
        assert_eq!(got, vec![3, 3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0, 0]);
        assert_eq!(reflect(-1, 1), 0);
        assert_eq!(reflect(7, 1), 0);
    }

    #[test]
    fn sums_match_naive_windows() {
        let img = GrayImage::from_fn(7, 5, |x, y| ((x * 37 + y * 91) % 256) as u8).unwrap();
        for (ww, wh) in [(1, 1), (3, 3), (4, 2), (9, 13)] {
            let s = LocalSums::compute(&img, ww, wh);
            for y in 0..5 {
                for x in 0..7 {
                    let mut sum = 0u64;
                    for dy in 0..wh {
                        for dx in 0..ww {
                            let xx = reflect(x as isize + window_start(ww) + dx as isize, 7);
                            let yy = reflect(y as isize + window_start(wh) + dy as isize, 5);
                            sum += img.get(xx, yy) as u64;
                        }
                    }
                    assert_eq!(s.sum[y * 7 + x], sum, "window {ww}x{wh} at ({x},{y})");
                }
            }
        }
    }
}
