//! Adaptive Wiener filtering with directional windows, used to split a
//! fabric image into a warp-only and a weft-only sub-image, and yarn
//! outline extraction from the binarized sub-images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::window::LocalSums;
use crate::imgcore::{
    histogram_equalize, otsu_split, otsu_threshold, remove_small_components, BinaryImage, GrayImage,
    Illumination, DEFAULT_SPECK_AREA,
};

/// Length of the directional window along the yarn.
pub const DIRECTIONAL_WINDOW_LONG: usize = 60;
/// Width of the directional window across the yarn.
pub const DIRECTIONAL_WINDOW_SHORT: usize = 5;

/// Fraction of a row/column that must be yarn for it to belong to a stripe.
pub const STRIPE_OCCUPANCY: f64 = 0.5;
/// Minimum gap between the mean yarn fractions of two groups of passing
/// lines for the lower group to be treated as crossed gap lines.
pub const STRIPE_GROUP_SEPARATION: f64 = 0.1;

/// The two yarn systems. Warp runs vertically in the image frame, weft
/// horizontally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YarnAxis {
    Warp,
    Weft,
}

impl YarnAxis {
    pub fn other(self) -> YarnAxis {
        match self {
            YarnAxis::Warp => YarnAxis::Weft,
            YarnAxis::Weft => YarnAxis::Warp,
        }
    }

    /// `(window_w, window_h)` of the directional Wiener window that keeps
    /// this yarn system.
    pub fn window(self) -> (usize, usize) {
        match self {
            YarnAxis::Warp => (DIRECTIONAL_WINDOW_SHORT, DIRECTIONAL_WINDOW_LONG),
            YarnAxis::Weft => (DIRECTIONAL_WINDOW_LONG, DIRECTIONAL_WINDOW_SHORT),
        }
    }
}

impl std::fmt::Display for YarnAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            YarnAxis::Warp => "warp",
            YarnAxis::Weft => "weft",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerParams {
    pub window_w: usize,
    pub window_h: usize,
    pub noise_variance: f64,
}

impl WienerParams {
    pub fn new(window_w: usize, window_h: usize, noise_variance: f64) -> Result<Self> {
        if window_w == 0 || window_h == 0 {
            return Err(Error::InvalidParams("Wiener window must be at least 1x1".into()));
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "noise variance must be finite and non-negative, got {noise_variance}"
            )));
        }
        Ok(Self { window_w, window_h, noise_variance })
    }
}

/// Mean of the local variances over reflect-padded windows of the given size.
pub fn estimate_noise_variance(img: &GrayImage, window_w: usize, window_h: usize) -> f64 {
    let sums = LocalSums::compute(img, window_w.max(1), window_h.max(1));
    let total: f64 = (0..sums.len()).map(|i| sums.variance(i)).sum();
    (total / sums.len() as f64).max(0.0)
}

/// Pixel-wise adaptive Wiener filter:
/// `W = mu + max(0, S2 - v2) / max(S2, v2) * (l - mu)`, with local mean `mu`
/// and variance `S2` over the window. Flat windows (`S2 = 0`) return `mu`.
pub fn wiener_filter(img: &GrayImage, p: &WienerParams) -> GrayImage {
    let sums = LocalSums::compute(img, p.window_w, p.window_h);
    let v2 = p.noise_variance;
    let mut out = img.clone();
    for (i, px) in out.pixels_mut().iter_mut().enumerate() {
        let mu = sums.mean(i);
        let s2 = sums.variance(i);
        let w = if s2 <= 0.0 {
            mu
        } else {
            let gain = (s2 - v2).max(0.0) / s2.max(v2);
            mu + gain * (*px as f64 - mu)
        };
        *px = w.round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Directional Wiener filter for one yarn system, with the noise variance
/// estimated from the image.
pub fn directional_filter(img: &GrayImage, axis: YarnAxis) -> Result<GrayImage> {
    let (ww, wh) = axis.window();
    if img.width() < ww || img.height() < wh {
        return Err(Error::ImageTooSmall(format!(
            "{axis} decomposition needs at least {ww}x{wh} px, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let v2 = estimate_noise_variance(img, ww, wh);
    Ok(wiener_filter(img, &WienerParams::new(ww, wh, v2)?))
}

/// Keeps one yarn system: [`directional_filter`] followed by histogram
/// equalization.
pub fn decompose(img: &GrayImage, axis: YarnAxis) -> Result<GrayImage> {
    Ok(histogram_equalize(&directional_filter(img, axis)?))
}

/// Otsu binarization of a decomposed sub-image with yarn mapped to 0 and
/// 3x3 specks removed.
pub fn binarize_sub_image(sub: &GrayImage, illumination: Illumination) -> Result<BinaryImage> {
    let (_, bin) = otsu_threshold(sub)?;
    let bin = match illumination {
        Illumination::Transmitted => bin,
        Illumination::Reflected => bin.inverted(),
    };
    Ok(remove_small_components(&bin, DEFAULT_SPECK_AREA))
}

/// Yarn stripes of one axis: inclusive pixel intervals across the yarn
/// direction (columns for warp, rows for weft).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YarnOutlines {
    pub axis: YarnAxis,
    pub stripes: Vec<(usize, usize)>,
    pub image_extent: usize,
    pub scale: Option<f64>,
}

impl YarnOutlines {
    pub fn new(
        axis: YarnAxis,
        stripes: Vec<(usize, usize)>,
        image_extent: usize,
        scale: Option<f64>,
    ) -> Result<Self> {
        let mut prev_end: Option<usize> = None;
        for &(s, e) in &stripes {
            if s > e || e >= image_extent || prev_end.is_some_and(|p| s <= p) {
                return Err(Error::InvalidInput(format!(
                    "stripes must be sorted, disjoint and inside 0..{image_extent}: {stripes:?}"
                )));
            }
            prev_end = Some(e);
        }
        Ok(Self { axis, stripes, image_extent, scale })
    }

    pub fn len(&self) -> usize {
        self.stripes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stripes.is_empty()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.stripes.iter().map(|&(s, e)| (s + e) as f64 / 2.0).collect()
    }
}

/// Extra cut applied to the lines that pass [`STRIPE_OCCUPANCY`]. Gap lines
/// crossed by the other yarn system reach roughly that system's cover
/// fraction; when the passing lines form two groups at least
/// [`STRIPE_GROUP_SEPARATION`] apart, only the upper Otsu group is yarn.
fn occupancy_cut(fractions: &[f64]) -> f64 {
    let passing: Vec<f64> = fractions.iter().copied().filter(|&f| f >= STRIPE_OCCUPANCY).collect();
    let Some(t) = otsu_split(&passing) else {
        return f64::NEG_INFINITY;
    };
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let (n, s) = it.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
        s / n as f64
    };
    let lo = mean(&mut passing.iter().copied().filter(|&f| f <= t));
    let hi = mean(&mut passing.iter().copied().filter(|&f| f > t));
    if hi - lo >= STRIPE_GROUP_SEPARATION {
        t
    } else {
        f64::NEG_INFINITY
    }
}

/// Projects yarn (0) pixels across the yarn direction and returns runs of
/// rows/columns whose yarn fraction is at least [`STRIPE_OCCUPANCY`] and
/// clears [`occupancy_cut`].
/// Runs touching the image border are partial yarns and are dropped.
pub fn extract_yarn_outlines(sub: &BinaryImage, axis: YarnAxis) -> YarnOutlines {
    let (extent, along) = match axis {
        YarnAxis::Warp => (sub.width(), sub.height()),
        YarnAxis::Weft => (sub.height(), sub.width()),
    };
    let mut counts = vec![0usize; extent];
    for y in 0..sub.height() {
        for (x, &p) in sub.row(y).iter().enumerate() {
            if p == 0 {
                match axis {
                    YarnAxis::Warp => counts[x] += 1,
                    YarnAxis::Weft => counts[y] += 1,
                }
            }
        }
    }
    let fractions: Vec<f64> = counts.iter().map(|&c| c as f64 / along as f64).collect();
    let cut = occupancy_cut(&fractions);
    let is_yarn: Vec<bool> = fractions.iter().map(|&f| f >= STRIPE_OCCUPANCY && f > cut).collect();

    YarnOutlines { axis, stripes: interior_runs(&is_yarn), image_extent: extent, scale: sub.scale() }
}

/// Mean intensity of every line across the yarn direction (columns for
/// warp, rows for weft), inverted under reflected light so yarn is low.
pub fn projection_profile(sub: &GrayImage, axis: YarnAxis, illumination: Illumination) -> Vec<f64> {
    let (extent, along) = match axis {
        YarnAxis::Warp => (sub.width(), sub.height()),
        YarnAxis::Weft => (sub.height(), sub.width()),
    };
    let mut profile = vec![0.0f64; extent];
    for y in 0..sub.height() {
        for (x, &p) in sub.row(y).iter().enumerate() {
            profile[if axis == YarnAxis::Warp { x } else { y }] += p as f64;
        }
    }
    for v in &mut profile {
        *v /= along as f64;
        if illumination == Illumination::Reflected {
            *v = 255.0 - *v;
        }
    }
    profile
}

/// Runs of lines whose profile value is in the lower Otsu class, dropping
/// runs that touch the image border.
pub fn outlines_from_profile(profile: &[f64], axis: YarnAxis, scale: Option<f64>) -> YarnOutlines {
    let extent = profile.len();
    let Some(t) = otsu_split(profile) else {
        return YarnOutlines { axis, stripes: Vec::new(), image_extent: extent, scale };
    };
    let is_yarn: Vec<bool> = profile.iter().map(|&v| v <= t).collect();
    YarnOutlines { axis, stripes: interior_runs(&is_yarn), image_extent: extent, scale }
}

fn interior_runs(is_yarn: &[bool]) -> Vec<(usize, usize)> {
    let extent = is_yarn.len();
    let mut stripes = Vec::new();
    let mut i = 0;
    while i < extent {
        if !is_yarn[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < extent && is_yarn[i] {
            i += 1;
        }
        let end = i - 1;
        if start > 0 && end < extent - 1 {
            stripes.push((start, end));
        }
    }
    stripes
}

/// Relative excess of stripes the per-pixel binarization must find over
/// the profile split before its outlines are preferred.
pub const STRIPE_COUNT_MARGIN: f64 = 0.1;

/// Yarn outlines of one axis from a directionally filtered image.
///
/// Two detectors run on the filtered image: an Otsu split of its projection
/// profile, and per-pixel Otsu binarization of the equalized image followed
/// by column occupancy. The profile split gives exact widths over a wide
/// range of covers but loses narrow gaps; the binary path keeps them. The
/// binary outlines are used only when they hold noticeably more stripes at
/// a more regular spacing.
/// Both are then snapped to the half-maximum edges of the profile.
pub fn locate_yarns(filtered: &GrayImage, axis: YarnAxis, illumination: Illumination) -> Result<YarnOutlines> {
    let profile = projection_profile(filtered, axis, illumination);
    let from_profile = outlines_from_profile(&profile, axis, filtered.scale());
    let chosen = match binarize_sub_image(&histogram_equalize(filtered), illumination) {
        Ok(bin) => {
            let from_binary = extract_yarn_outlines(&bin, axis);
            if from_binary.len() as f64 > from_profile.len() as f64 * (1.0 + STRIPE_COUNT_MARGIN)
                && spacing_variation(&from_binary) < spacing_variation(&from_profile)
            {
                from_binary
            } else {
                from_profile
            }
        }
        Err(Error::DegenerateHistogram) => from_profile,
        Err(e) => return Err(e),
    };
    refine_yarn_edges(&chosen, &profile)
}

/// Coefficient of variation of the center-to-center distances; infinite
/// with fewer than three stripes.
fn spacing_variation(o: &YarnOutlines) -> f64 {
    let c = o.centers();
    if c.len() < 3 {
        return f64::INFINITY;
    }
    let d: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d.len() as f64;
    var.sqrt() / mean
}

/// Moves each stripe edge to the half-maximum point of a projection
/// profile, halfway between the darkest line of the stripe and the
/// brightest line of the neighbouring gaps.
pub fn refine_yarn_edges(o: &YarnOutlines, profile: &[f64]) -> Result<YarnOutlines> {
    let extent = profile.len();
    if extent != o.image_extent {
        return Err(Error::InvalidInput(format!(
            "outlines span {} lines but the profile has {extent}",
            o.image_extent
        )));
    }
    let n = o.stripes.len();
    let mut refined: Vec<(usize, usize)> = Vec::with_capacity(n);
    for (i, &(s, e)) in o.stripes.iter().enumerate() {
        let lo = if i == 0 { 0 } else { o.stripes[i - 1].1 + 1 };
        let hi = if i + 1 == n { extent - 1 } else { o.stripes[i + 1].0 - 1 };
        let gap = profile[lo..s].iter().chain(&profile[e + 1..=hi]).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let core = profile[s..=e].iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if gap.partial_cmp(&core) != Some(std::cmp::Ordering::Greater) {
            refined.push((s, e));
            continue;
        }
        let half = (core + gap) / 2.0;
        let floor = refined.last().map_or(lo, |&(_, pe)| pe + 1).max(lo);
        let (mut ns, mut ne) = (s, e);
        while ns > floor && profile[ns - 1] < half {
            ns -= 1;
        }
        while ne < hi && profile[ne + 1] < half {
            ne += 1;
        }
        while ns < ne && profile[ns] >= half {
            ns += 1;
        }
        while ne > ns && profile[ne] >= half {
            ne -= 1;
        }
        refined.push((ns, ne));
    }
    YarnOutlines::new(o.axis, refined, o.image_extent, o.scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_variance_of_constant_is_zero() {
        let img = GrayImage::filled(9, 9, 42).unwrap();
        assert_eq!(estimate_noise_variance(&img, 3, 3), 0.0);
    }

    #[test]
    fn noise_variance_of_two_pixels() {
        // A window spanning the full mirrored period (4x1 for a 2x1 image)
        // sees {0, 0, 255, 255} at every pixel.
        let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
        assert_eq!(estimate_noise_variance(&img, 4, 1), 16256.25);
    }

    #[test]
    fn zero_noise_is_identity() {
        let img = GrayImage::from_fn(11, 9, |x, y| ((x * 53 + y * 29) % 256) as u8).unwrap();
        let out = wiener_filter(&img, &WienerParams::new(3, 5, 0.0).unwrap());
        assert_eq!(out, img);
    }

    #[test]
    fn constant_is_fixed_point() {
        let img = GrayImage::filled(8, 8, 200).unwrap();
        for v2 in [0.0, 10.0, 1e6] {
            assert_eq!(wiener_filter(&img, &WienerParams::new(5, 3, v2).unwrap()), img);
        }
    }

    #[test]
    fn params_validation() {
        assert!(WienerParams::new(0, 3, 1.0).is_err());
        assert!(WienerParams::new(3, 3, -1.0).is_err());
    }

    #[test]
    fn decompose_needs_window_extent() {
        let img = GrayImage::filled(100, 40, 10).unwrap();
        assert!(matches!(decompose(&img, YarnAxis::Warp), Err(Error::ImageTooSmall(_))));
        assert!(decompose(&img, YarnAxis::Weft).is_ok());
        let img = GrayImage::filled(40, 100, 10).unwrap();
        assert!(matches!(decompose(&img, YarnAxis::Weft), Err(Error::ImageTooSmall(_))));
        let img = GrayImage::filled(64, 64, 10).unwrap();
        assert_eq!(decompose(&img, YarnAxis::Warp).unwrap(), img);
        assert_eq!(decompose(&img, YarnAxis::Weft).unwrap(), img);
    }

    #[test]
    fn outlines_from_hand_fixture() {
        let bin = BinaryImage::from_fn(50, 20, |x, _| !((10..=14).contains(&x) || (30..=34).contains(&x)))
            .unwrap();
        let o = extract_yarn_outlines(&bin, YarnAxis::Warp);
        assert_eq!(o.stripes, vec![(10, 14), (30, 34)]);
        assert_eq!(o.image_extent, 50);
        let o = extract_yarn_outlines(&bin, YarnAxis::Weft);
        assert!(o.is_empty());
    }

    #[test]
    fn outlines_of_blank_image_are_empty() {
        let bin = BinaryImage::from_fn(20, 20, |_, _| true).unwrap();
        assert!(extract_yarn_outlines(&bin, YarnAxis::Warp).is_empty());
        assert!(extract_yarn_outlines(&bin, YarnAxis::Weft).is_empty());
    }

    #[test]
    fn outlines_validate_order() {
        assert!(YarnOutlines::new(YarnAxis::Warp, vec![(5, 3)], 10, None).is_err());
        assert!(YarnOutlines::new(YarnAxis::Warp, vec![(1, 3), (3, 4)], 10, None).is_err());
        assert!(YarnOutlines::new(YarnAxis::Warp, vec![(1, 3), (5, 10)], 10, None).is_err());
        assert!(YarnOutlines::new(YarnAxis::Warp, vec![(1, 3), (5, 9)], 10, None).is_ok());
    }
}
