//! Thread density from standard-line yarn counts on reconstructed,
//! locally thresholded images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{niblack_threshold, BinaryImage, GrayImage, NiblackParams};
use crate::spectral::{reconstruct_axis, DEFAULT_BAND_HALF_WIDTH};
use crate::wiener::YarnAxis;

/// Smallest image side accepted by [`measure_density`].
pub const MIN_DENSITY_IMAGE_SIDE: usize = 64;
/// Number of evenly spaced standard lines averaged per image.
pub const DEFAULT_STANDARD_LINES: usize = 10;

/// Result of counting yarns along one standard line. `start`/`end` are
/// `None` when the line has no complete alternation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardLineCount {
    pub yarn_count: usize,
    pub start: Option<usize>,
    pub end: Option<usize>,
    pub line_index: usize,
}

impl StandardLineCount {
    fn zero(line_index: usize) -> Self {
        Self { yarn_count: 0, start: None, end: None, line_index }
    }
}

/// Which way a standard line runs through a binary image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineOrientation {
    /// A row, traversed left to right.
    Row,
    /// A column, traversed top to bottom.
    Column,
}

/// Counts yarns on a 0/1 line.
///
/// The start point is the first pixel whose value differs from pixel 0.
/// The end point is the last pixel of the final complete run (one not cut
/// by the border) holding the opposite value to the start pixel. The count
/// is the number of runs of the start value between them.
pub fn count_yarns(line: &[u8], line_index: usize) -> Result<StandardLineCount> {
    if line.len() < 2 {
        return Err(Error::InvalidInput(format!("standard line needs >= 2 pixels, got {}", line.len())));
    }
    // (value, start, end) runs
    let mut runs: Vec<(u8, usize, usize)> = Vec::new();
    for (i, &v) in line.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.0 == v => run.2 = i,
            _ => runs.push((v, i, i)),
        }
    }
    if runs.len() < 3 {
        return Ok(StandardLineCount::zero(line_index));
    }
    let (start_value, start, _) = runs[1];
    // the last run touches the border, so it never qualifies
    let end_run = (2..runs.len() - 1).rev().find(|&j| runs[j].0 != start_value);
    match end_run {
        Some(j) => Ok(StandardLineCount {
            yarn_count: j / 2,
            start: Some(start),
            end: Some(runs[j].2),
            line_index,
        }),
        None => Ok(StandardLineCount::zero(line_index)),
    }
}

/// Counts yarns along row or column `index` of a binary image.
pub fn count_yarns_on_line(
    img: &BinaryImage,
    index: usize,
    orientation: LineOrientation,
) -> Result<StandardLineCount> {
    match orientation {
        LineOrientation::Row if index < img.height() => count_yarns(img.row(index), index),
        LineOrientation::Column if index < img.width() => count_yarns(&img.column(index), index),
        _ => Err(Error::InvalidInput(format!("line {index} is outside the image"))),
    }
}

/// `D = N / ((EP - SP + 1) * scale)` in threads/cm.
pub fn density_from_count(c: &StandardLineCount, scale: f64) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidScale(scale));
    }
    match (c.yarn_count, c.start, c.end) {
        (n, Some(sp), Some(ep)) if n >= 1 && ep >= sp => Ok(n as f64 / ((ep - sp + 1) as f64 * scale)),
        _ => Err(Error::NoYarn),
    }
}

/// `|automatic - manual| / manual * 100`, in percent.
pub fn measurement_error(automatic: f64, manual: f64) -> Result<f64> {
    if !(manual.is_finite() && manual > 0.0) {
        return Err(Error::InvalidReference(manual));
    }
    Ok(((automatic - manual) / manual).abs() * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    pub niblack: NiblackParams,
    pub band_half_width: usize,
    pub lines: usize,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            niblack: NiblackParams::default(),
            band_half_width: DEFAULT_BAND_HALF_WIDTH,
            lines: DEFAULT_STANDARD_LINES,
        }
    }
}

/// Per-line densities of one yarn system and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityResult {
    pub axis: YarnAxis,
    pub per_line: Vec<f64>,
    pub mean_threads_per_cm: f64,
    pub scale_cm_per_px: f64,
    pub lines_used: usize,
}

fn evenly_spaced(extent: usize, n: usize) -> Vec<usize> {
    (1..=n).map(|i| i * extent / (n + 1)).collect()
}

/// Counts yarns on `lines` evenly spaced interior rows of a binary image
/// in which the counted yarns run vertically. Zero-count lines are skipped.
fn density_from_rows(bin: &BinaryImage, axis: YarnAxis, scale: f64, lines: usize) -> Result<DensityResult> {
    let mut per_line = Vec::new();
    for y in evenly_spaced(bin.height(), lines.max(1)) {
        let count = count_yarns_on_line(bin, y, LineOrientation::Row)?;
        if count.yarn_count > 0 {
            per_line.push(density_from_count(&count, scale)?);
        }
    }
    if per_line.is_empty() {
        return Err(Error::MeasurementFailed(format!("no {axis} yarns found on any standard line")));
    }
    let mean = per_line.iter().sum::<f64>() / per_line.len() as f64;
    Ok(DensityResult {
        axis,
        lines_used: per_line.len(),
        per_line,
        mean_threads_per_cm: mean,
        scale_cm_per_px: scale,
    })
}

fn required_scale(scale: Option<f64>) -> Result<f64> {
    match scale {
        Some(s) if s.is_finite() && s > 0.0 => Ok(s),
        Some(s) => Err(Error::InvalidScale(s)),
        None => Err(Error::InvalidInput("image has no cm/pixel scale".into())),
    }
}

/// Full density pipeline for one yarn system: band-template reconstruction,
/// Niblack thresholding and standard-line counting. Weft is measured by
/// rotating the image 90° and running the warp path.
pub fn measure_density(img: &GrayImage, axis: YarnAxis, params: &DensityParams) -> Result<DensityResult> {
    let scale = required_scale(img.scale())?;
    if img.width() < MIN_DENSITY_IMAGE_SIDE || img.height() < MIN_DENSITY_IMAGE_SIDE {
        return Err(Error::ImageTooSmall(format!(
            "density needs at least {MIN_DENSITY_IMAGE_SIDE}x{MIN_DENSITY_IMAGE_SIDE} px, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let rotated;
    let oriented = match axis {
        YarnAxis::Warp => img,
        YarnAxis::Weft => {
            rotated = img.rotate90();
            &rotated
        }
    };
    let reconstructed = reconstruct_axis(oriented, YarnAxis::Warp, params.band_half_width)?;
    let bin = niblack_threshold(&reconstructed, &params.niblack)?;
    density_from_rows(&bin, axis, scale, params.lines)
}

/// Density from an already thresholded image (yarn/gap stripes). Warp is
/// counted along rows, weft along columns.
pub fn measure_density_binary(bin: &BinaryImage, axis: YarnAxis, lines: usize) -> Result<DensityResult> {
    let scale = required_scale(bin.scale())?;
    match axis {
        YarnAxis::Warp => density_from_rows(bin, axis, scale, lines),
        YarnAxis::Weft => {
            let (w, h) = (bin.width(), bin.height());
            let transposed = BinaryImage::from_fn(h, w, |x, y| bin.get(y, x) == 1)?.with_scale(bin.scale());
            density_from_rows(&transposed, axis, scale, lines)
        }
    }
}
