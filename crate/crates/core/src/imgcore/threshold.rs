use serde::{Deserialize, Serialize};

use super::window::LocalSums;
use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Global threshold maximizing the between-class variance of a 256-bin
/// histogram. Class 0 is `level <= t`. Ties go to the smallest `t`.
pub fn otsu_threshold_value(hist: &[u64; 256]) -> Result<u8> {
    let total: u64 = hist.iter().sum();
    let sum_all: u64 = hist.iter().enumerate().map(|(l, &c)| l as u64 * c).sum();

    let mut best: Option<(u8, Score)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (t, &count) in hist.iter().enumerate() {
        n0 += count;
        s0 += t as u64 * count;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // between-class variance = (N*S0 - n0*S)^2 / (N^2 * n0 * n1)
        let a = (total as i128 * s0 as i128 - n0 as i128 * sum_all as i128).unsigned_abs();
        let score = Score { num: a, den: n0 as u128 * n1 as u128 };
        if score.is_zero() {
            continue;
        }
        match &best {
            Some((_, b)) if !score.greater_than(b) => {}
            _ => best = Some((t as u8, score)),
        }
    }
    best.map(|(t, _)| t).ok_or(Error::DegenerateHistogram)
}

/// `num^2 / den`, compared exactly when it fits in 128 bits.
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn is_zero(&self) -> bool {
        self.num == 0
    }

    fn greater_than(&self, other: &Score) -> bool {
        let exact = self
            .num
            .checked_mul(self.num)
            .and_then(|l| l.checked_mul(other.den))
            .zip(other.num.checked_mul(other.num).and_then(|r| r.checked_mul(self.den)));
        match exact {
            Some((l, r)) => l > r,
            None => {
                let l = (self.num as f64).powi(2) / self.den as f64;
                let r = (other.num as f64).powi(2) / other.den as f64;
                l > r
            }
        }
    }
}

/// Otsu binarization: pixels `<= threshold` become 0, the rest 1.
pub fn otsu_threshold(img: &GrayImage) -> Result<(u8, BinaryImage)> {
    let t = otsu_threshold_value(&img.histogram())?;
    let pixels = img.pixels().iter().map(|&p| (p > t) as u8).collect();
    let bin = BinaryImage::new(img.width(), img.height(), pixels)?.with_scale(img.scale());
    Ok((t, bin))
}

/// Otsu split of arbitrary real values. Returns the largest value of the
/// lower class; values strictly greater belong to the upper class.
/// `None` when fewer than two distinct values exist.
pub fn otsu_split(values: &[f64]) -> Option<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let total: f64 = sorted.iter().sum();
    let mut best: Option<(f64, f64)> = None;
    let mut s0 = 0.0;
    for i in 0..n.saturating_sub(1) {
        s0 += sorted[i];
        if sorted[i] == sorted[i + 1] {
            continue;
        }
        let n0 = (i + 1) as f64;
        let n1 = (n - i - 1) as f64;
        let m0 = s0 / n0;
        let m1 = (total - s0) / n1;
        let var = n0 * n1 * (m0 - m1).powi(2);
        if best.is_none_or(|(_, b)| var > b) {
            best = Some((sorted[i], var));
        }
    }
    best.map(|(t, _)| t)
}

/// Niblack local threshold parameters: window size and weight `k` in
/// `T = mean + k * std`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiblackParams {
    window_w: usize,
    window_h: usize,
    k: f64,
}

impl NiblackParams {
    /// Even window sizes are rounded up to the next odd size so the
    /// window has a center pixel.
    pub fn new(window_w: usize, window_h: usize, k: f64) -> Result<Self> {
        if window_w < 3 || window_h < 3 {
            return Err(Error::InvalidParams(format!(
                "Niblack window must be at least 3x3, got {window_w}x{window_h}"
            )));
        }
        if !k.is_finite() {
            return Err(Error::InvalidParams(format!("Niblack k must be finite, got {k}")));
        }
        Ok(Self { window_w: window_w | 1, window_h: window_h | 1, k })
    }

    pub fn window_w(&self) -> usize {
        self.window_w
    }

    pub fn window_h(&self) -> usize {
        self.window_h
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

impl Default for NiblackParams {
    /// 32x32 window (normalized to 33x33), k = 0.2.
    fn default() -> Self {
        Self::new(32, 32, 0.2).expect("valid default")
    }
}

/// Per-pixel Niblack thresholds `T = mean + k * std` over a reflect-padded
/// window (population standard deviation).
pub fn niblack_thresholds(img: &GrayImage, p: &NiblackParams) -> Result<Vec<f64>> {
    if p.window_w > 4 * img.width() || p.window_h > 4 * img.height() {
        return Err(Error::InvalidParams(format!(
            "Niblack window {}x{} exceeds 4x the {}x{} image",
            p.window_w,
            p.window_h,
            img.width(),
            img.height()
        )));
    }
    let sums = LocalSums::compute(img, p.window_w, p.window_h);
    Ok((0..sums.len())
        .map(|i| sums.mean(i) + p.k * sums.variance(i).sqrt())
        .collect())
}

/// Pixels strictly brighter than their local threshold become 1.
pub fn niblack_threshold(img: &GrayImage, p: &NiblackParams) -> Result<BinaryImage> {
    let t = niblack_thresholds(img, p)?;
    let pixels = img
        .pixels()
        .iter()
        .zip(&t)
        .map(|(&v, &t)| (v as f64 > t) as u8)
        .collect();
    Ok(BinaryImage::new(img.width(), img.height(), pixels)?.with_scale(img.scale()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn otsu_bimodal() {
        let img = GrayImage::from_fn(8, 8, |x, _| if x < 4 { 0 } else { 255 }).unwrap();
        let (t, bin) = otsu_threshold(&img).unwrap();
        assert_eq!(t, 0);
        assert_eq!(bin.get(0, 0), 0);
        assert_eq!(bin.get(7, 0), 1);
    }

    #[test]
    fn otsu_three_pixels() {
        // {10,10,200}: the only non-trivial split separates 200.
        let img = GrayImage::new(3, 1, vec![10, 10, 200]).unwrap();
        let (t, bin) = otsu_threshold(&img).unwrap();
        assert!((10..200).contains(&t));
        assert_eq!(bin.pixels(), &[0, 0, 1]);
    }

    #[test]
    fn otsu_single_level_is_degenerate() {
        let img = GrayImage::filled(4, 4, 77).unwrap();
        assert!(matches!(otsu_threshold(&img), Err(Error::DegenerateHistogram)));
    }

    #[test]
    fn otsu_split_reals() {
        assert_eq!(otsu_split(&[10.0, 10.0, 90.0, 90.0]), Some(10.0));
        assert_eq!(otsu_split(&[5.0, 5.0]), None);
        assert_eq!(otsu_split(&[]), None);
    }

    #[test]
    fn niblack_default_window_is_33() {
        let p = NiblackParams::default();
        assert_eq!((p.window_w(), p.window_h(), p.k()), (33, 33, 0.2));
        assert!(NiblackParams::new(2, 5, 0.2).is_err());
        assert!(NiblackParams::new(5, 5, f64::NAN).is_err());
    }

    #[test]
    fn niblack_constant_image_is_all_zero() {
        let img = GrayImage::filled(10, 10, 120).unwrap();
        for k in [-1.0, 0.0, 0.2, 3.0] {
            let bin = niblack_threshold(&img, &NiblackParams::new(5, 5, k).unwrap()).unwrap();
            assert_eq!(bin.count_ones(), 0);
        }
    }

    #[test]
    fn niblack_mean_100_std_10_gives_102() {
        // deviations {+15,-15,+15,-15,0,0,0,0,0}: mean 100, population var 900/9
        let img = GrayImage::new(3, 3, vec![115, 85, 100, 100, 100, 100, 115, 85, 100]).unwrap();
        let t = niblack_thresholds(&img, &NiblackParams::new(3, 3, 0.2).unwrap()).unwrap();
        assert!((t[4] - 102.0).abs() < 1e-12);
    }

    #[test]
    fn niblack_rejects_huge_window() {
        let img = GrayImage::filled(4, 4, 0).unwrap();
        let p = NiblackParams::new(17, 3, 0.2).unwrap();
        assert!(matches!(niblack_thresholds(&img, &p), Err(Error::InvalidParams(_))));
    }
}
