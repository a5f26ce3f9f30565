//! Defect detection: grayscale/equalize/Otsu preprocessing, Canny, Sobel
//! and Prewitt edges, median-deviation segmentation and area reports.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{
    histogram_equalize, label_components, otsu_split, otsu_threshold, otsu_threshold_value, to_grayscale,
    BinaryImage, GrayImage, Illumination, Rect, RgbImage,
};

/// Regions smaller than this many pixels are ignored by default.
pub const DEFAULT_MIN_DEFECT_SIZE: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMethod {
    Canny,
    Sobel,
    Prewitt,
}

/// Gaussian sigma and hysteresis thresholds as fractions of the largest
/// gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    sigma: f64,
    low: f64,
    high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self { sigma: 1.4, low: 0.1, high: 0.3 }
    }
}

impl CannyParams {
    pub fn new(sigma: f64, low: f64, high: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParams(format!("Canny sigma must be positive, got {sigma}")));
        }
        if !(0.0 < low && low <= high && high <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "Canny thresholds need 0 < low <= high <= 1, got {low}/{high}"
            )));
        }
        Ok(Self { sigma, low, high })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }
}

/// Intermediates of the preprocessing chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub gray: GrayImage,
    pub equalized: GrayImage,
    pub binary: BinaryImage,
    pub otsu_threshold: u8,
}

/// Grayscale conversion, histogram equalization and Otsu binarization.
pub fn preprocess(rgb: &RgbImage) -> Result<Preprocessed> {
    let gray = to_grayscale(rgb)?;
    let equalized = histogram_equalize(&gray);
    let (otsu_threshold, binary) = otsu_threshold(&equalized)?;
    Ok(Preprocessed { gray, equalized, binary, otsu_threshold })
}

/// Row-major f64 plane with clamped (replicated) borders.
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    fn from_gray(img: &GrayImage) -> Self {
        Self { width: img.width(), height: img.height(), data: img.pixels().iter().map(|&p| p as f64).collect() }
    }

    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    fn gaussian(&self, sigma: f64) -> Plane {
        let radius = (3.0 * sigma).ceil() as isize;
        let mut kernel: Vec<f64> = (-radius..=radius).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
        let sum: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= sum);
        let pass = |src: &Plane, horizontal: bool| {
            let mut data = Vec::with_capacity(src.data.len());
            for y in 0..src.height as isize {
                for x in 0..src.width as isize {
                    let v = (-radius..=radius)
                        .zip(&kernel)
                        .map(|(d, k)| k * if horizontal { src.at(x + d, y) } else { src.at(x, y + d) })
                        .sum();
                    data.push(v);
                }
            }
            Plane { width: src.width, height: src.height, data }
        };
        pass(&pass(self, true), false)
    }

    /// Horizontal and vertical derivatives with a 3x3 kernel whose
    /// cross-axis weights are `[1, center, 1]`.
    fn gradients(&self, center: f64) -> (Vec<f64>, Vec<f64>) {
        let w = [1.0, center, 1.0];
        let mut gx = Vec::with_capacity(self.data.len());
        let mut gy = Vec::with_capacity(self.data.len());
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                let (mut sx, mut sy) = (0.0, 0.0);
                for (i, d) in (-1..=1isize).enumerate() {
                    sx += w[i] * (self.at(x + 1, y + d) - self.at(x - 1, y + d));
                    sy += w[i] * (self.at(x + d, y + 1) - self.at(x + d, y - 1));
                }
                gx.push(sx);
                gy.push(sy);
            }
        }
        (gx, gy)
    }
}

fn magnitude(gx: &[f64], gy: &[f64]) -> Vec<f64> {
    gx.iter().zip(gy).map(|(a, b)| a.hypot(*b)).collect()
}

/// Edge map with default Canny parameters.
pub fn edge_detect(img: &GrayImage, method: EdgeMethod) -> BinaryImage {
    edge_detect_with(img, method, &CannyParams::default())
}

/// Edge map (edges = 1). Canny: Gaussian smoothing, Sobel gradient,
/// non-maximum suppression and hysteresis relative to the largest
/// magnitude. Sobel/Prewitt: gradient magnitude above its Otsu split.
pub fn edge_detect_with(img: &GrayImage, method: EdgeMethod, canny: &CannyParams) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let plane = Plane::from_gray(img);
    let edges = match method {
        EdgeMethod::Sobel | EdgeMethod::Prewitt => {
            let (gx, gy) = plane.gradients(if method == EdgeMethod::Sobel { 2.0 } else { 1.0 });
            let mag = magnitude(&gx, &gy);
            match otsu_split(&mag) {
                Some(t) => mag.iter().map(|&m| m > t).collect(),
                None => vec![false; w * h],
            }
        }
        EdgeMethod::Canny => {
            let (gx, gy) = plane.gaussian(canny.sigma).gradients(2.0);
            let mag = magnitude(&gx, &gy);
            let thin = non_maximum_suppression(&mag, &gx, &gy, w, h);
            hysteresis(&thin, w, h, canny.low, canny.high)
        }
    };
    BinaryImage::from_fn(w, h, |x, y| edges[y * w + x]).expect("non-empty image").with_scale(img.scale())
}

/// Keeps magnitudes that peak along the gradient direction, quantized to
/// 0/45/90/135 degrees. Ties go to the pixel on the negative side.
fn non_maximum_suppression(mag: &[f64], gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let get = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; mag.len()];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dx, dy) = match angle {
                a if !(22.5..157.5).contains(&a) => (1, 0),
                a if a < 67.5 => (1, 1),
                a if a < 112.5 => (0, 1),
                _ => (-1, 1),
            };
            let (xi, yi) = (x as isize, y as isize);
            let before = get(xi - dx, yi - dy);
            let after = get(xi + dx, yi + dy);
            if m > before && m >= after {
                out[i] = m;
            }
        }
    }
    out
}

fn hysteresis(mag: &[f64], w: usize, h: usize, low: f64, high: f64) -> Vec<bool> {
    let max = mag.iter().copied().fold(0.0, f64::max);
    let mut edge = vec![false; mag.len()];
    if max == 0.0 {
        return edge;
    }
    let (lo, hi) = (low * max, high * max);
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &m) in mag.iter().enumerate() {
        if m >= hi {
            edge[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edge[j] && mag[j] >= lo && mag[j] > 0.0 {
                    edge[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    edge
}

/// Thick regions are denser than the fabric baseline, thin ones lighter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Thick,
    Thin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRegion {
    pub bbox: Rect,
    /// Unweighted pixel centroid `(x, y)`.
    pub centroid_px: (f64, f64),
    pub area_px: usize,
    pub polarity: Polarity,
}

/// Regions under transmitted light.
pub fn segment_defects(img: &GrayImage, min_size: usize) -> Result<Vec<DefectRegion>> {
    segment_defects_for(img, min_size, Illumination::Transmitted)
}

/// Pixels whose deviation from the global median exceeds the Otsu split of
/// all deviations, grouped 8-connected and kept when at least `min_size`
/// pixels large. A region darker than the median is thick under
/// transmitted light and thin under reflected light.
pub fn segment_defects_for(img: &GrayImage, min_size: usize, illumination: Illumination) -> Result<Vec<DefectRegion>> {
    if min_size == 0 {
        return Err(Error::InvalidParams("minimum defect size must be at least 1 pixel".into()));
    }
    let median = img.median() as i16;
    let deviation: Vec<u8> = img.pixels().iter().map(|&p| (p as i16 - median).unsigned_abs() as u8).collect();
    let mut hist = [0u64; 256];
    for &d in &deviation {
        hist[d as usize] += 1;
    }
    let t = match otsu_threshold_value(&hist) {
        Ok(t) => t,
        Err(Error::DegenerateHistogram) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mask: Vec<bool> = deviation.iter().map(|&d| d > t).collect();
    let w = img.width();
    let px = img.pixels();
    let regions = label_components(w, img.height(), &mask)
        .into_iter()
        .filter(|c| c.area() >= min_size)
        .map(|c| {
            let (x0, y0, x1, y1) = c.bbox(w);
            let mean = c.pixels.iter().map(|&i| px[i] as f64).sum::<f64>() / c.area() as f64;
            let darker = mean < median as f64;
            let polarity = match (darker, illumination) {
                (true, Illumination::Transmitted) | (false, Illumination::Reflected) => Polarity::Thick,
                _ => Polarity::Thin,
            };
            DefectRegion {
                bbox: Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
                centroid_px: c.centroid(w),
                area_px: c.area(),
                polarity,
            }
        })
        .collect();
    Ok(regions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub regions: Vec<DefectRegion>,
    pub total_area_px: usize,
    pub defect_area_px: usize,
    pub percent_defective: f64,
    pub min_size_px: usize,
}

/// Area totals over a `width` x `height` image.
pub fn defect_report(regions: Vec<DefectRegion>, width: usize, height: usize, min_size: usize) -> Result<DefectReport> {
    let total = width * height;
    if total == 0 {
        return Err(Error::InvalidInput("image has no pixels".into()));
    }
    let defect: usize = regions.iter().map(|r| r.area_px).sum();
    if defect > total {
        return Err(Error::InvalidInput(format!("regions cover {defect} px of a {total} px image")));
    }
    Ok(DefectReport {
        regions,
        total_area_px: total,
        defect_area_px: defect,
        percent_defective: 100.0 * defect as f64 / total as f64,
        min_size_px: min_size,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectParams {
    pub min_size: usize,
    pub method: EdgeMethod,
    pub illumination: Illumination,
    pub canny: CannyParams,
}

impl Default for DefectParams {
    fn default() -> Self {
        Self {
            min_size: DEFAULT_MIN_DEFECT_SIZE,
            method: EdgeMethod::Canny,
            illumination: Illumination::Transmitted,
            canny: CannyParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectAnalysis {
    pub preprocessed: Preprocessed,
    pub edges: BinaryImage,
    pub report: DefectReport,
}

/// Preprocessing, edges of the equalized image, and segmentation of the
/// grayscale image.
pub fn analyze_defects(rgb: &RgbImage, params: &DefectParams) -> Result<DefectAnalysis> {
    let preprocessed = preprocess(rgb)?;
    let edges = edge_detect_with(&preprocessed.equalized, params.method, &params.canny);
    let gray = &preprocessed.gray;
    let regions = segment_defects_for(gray, params.min_size, params.illumination)?;
    let report = defect_report(regions, gray.width(), gray.height(), params.min_size)?;
    Ok(DefectAnalysis { preprocessed, edges, report })
}

const EDGE_COLOR: [u8; 3] = [255, 255, 0];
const THICK_COLOR: [u8; 3] = [255, 0, 0];
const THIN_COLOR: [u8; 3] = [0, 0, 255];
const MARKER_RADIUS: isize = 4;

/// Grayscale image with edges in yellow and a cross at every region
/// centroid, red for thick and blue for thin.
pub fn annotate(img: &GrayImage, edges: &BinaryImage, regions: &[DefectRegion]) -> RgbImage {
    let mut out = img.to_rgb();
    for y in 0..edges.height().min(img.height()) {
        for x in 0..edges.width().min(img.width()) {
            if edges.get(x, y) == 1 {
                out.put_pixel(x as u32, y as u32, image::Rgb(EDGE_COLOR));
            }
        }
    }
    let (w, h) = (img.width() as isize, img.height() as isize);
    for r in regions {
        let color = match r.polarity {
            Polarity::Thick => THICK_COLOR,
            Polarity::Thin => THIN_COLOR,
        };
        let (cx, cy) = (r.centroid_px.0.round() as isize, r.centroid_px.1.round() as isize);
        for d in -MARKER_RADIUS..=MARKER_RADIUS {
            for (x, y) in [(cx + d, cy), (cx, cy + d)] {
                if (0..w).contains(&x) && (0..h).contains(&y) {
                    out.put_pixel(x as u32, y as u32, image::Rgb(color));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(a: u8, b: u8) -> GrayImage {
        GrayImage::from_fn(20, 12, |x, _| if x < 10 { a } else { b }).unwrap()
    }

    fn block_field() -> GrayImage {
        GrayImage::from_fn(100, 100, |x, y| if (40..50).contains(&x) && (30..40).contains(&y) { 60 } else { 160 })
            .unwrap()
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = GrayImage::filled(16, 16, 77).unwrap();
        for m in [EdgeMethod::Canny, EdgeMethod::Sobel, EdgeMethod::Prewitt] {
            assert_eq!(edge_detect(&img, m).count_ones(), 0);
        }
    }

    #[test]
    fn canny_step_is_one_column() {
        let e = edge_detect(&step(20, 200), EdgeMethod::Canny);
        let cols: Vec<usize> = (0..20).filter(|&x| (0..12).any(|y| e.get(x, y) == 1)).collect();
        assert_eq!(cols.len(), 1, "{cols:?}");
        assert!((9..=11).contains(&cols[0]));
        assert!((0..12).all(|y| e.get(cols[0], y) == 1));
    }

    #[test]
    fn sobel_and_prewitt_share_support() {
        let img = step(30, 90);
        let s = edge_detect(&img, EdgeMethod::Sobel);
        let p = edge_detect(&img, EdgeMethod::Prewitt);
        assert_eq!(s.pixels(), p.pixels());
        assert_eq!(s.count_ones(), 2 * 12);
    }

    #[test]
    fn canny_ignores_affine_rescaling() {
        let base = edge_detect(&step(10, 30), EdgeMethod::Canny);
        for (a, b) in [(25, 65), (40, 120), (100, 180)] {
            assert_eq!(edge_detect(&step(a, b), EdgeMethod::Canny).pixels(), base.pixels());
        }
    }

    #[test]
    fn dark_block_is_one_thick_region() {
        let r = segment_defects(&block_field(), 10).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].area_px, 100);
        assert_eq!(r[0].polarity, Polarity::Thick);
        assert_eq!(r[0].bbox, Rect::new(40, 30, 10, 10));
        let (cx, cy) = r[0].centroid_px;
        assert!((cx - 44.5).abs() <= 0.5 && (cy - 34.5).abs() <= 0.5);
        assert!(segment_defects(&block_field(), 200).unwrap().is_empty());
        let refl = segment_defects_for(&block_field(), 10, Illumination::Reflected).unwrap();
        assert_eq!(refl[0].polarity, Polarity::Thin);
    }

    #[test]
    fn uniform_image_has_no_regions() {
        assert!(segment_defects(&GrayImage::filled(30, 30, 128).unwrap(), 1).unwrap().is_empty());
        assert!(segment_defects(&GrayImage::filled(30, 30, 128).unwrap(), 0).is_err());
    }

    #[test]
    fn report_arithmetic() {
        let region = |area| DefectRegion {
            bbox: Rect::new(0, 0, 1, 1),
            centroid_px: (0.0, 0.0),
            area_px: area,
            polarity: Polarity::Thick,
        };
        assert_eq!(defect_report(vec![region(100)], 100, 100, 9).unwrap().percent_defective, 1.0);
        assert_eq!(defect_report(vec![], 100, 100, 9).unwrap().percent_defective, 0.0);
        let r = defect_report(vec![region(50), region(150)], 200, 200, 9).unwrap();
        assert_eq!((r.defect_area_px, r.percent_defective), (200, 0.5));
    }

    #[test]
    fn constant_rgb_fails_preprocessing() {
        let rgb = RgbImage::from_pixel(8, 8, image::Rgb([40, 80, 120]));
        assert!(matches!(preprocess(&rgb), Err(Error::DegenerateHistogram)));
    }

    #[test]
    fn preprocess_composes_core_steps() {
        let rgb = RgbImage::from_fn(8, 8, |x, y| image::Rgb([(x * 30) as u8, (y * 20) as u8, 50]));
        let p = preprocess(&rgb).unwrap();
        let gray = to_grayscale(&rgb).unwrap();
        assert_eq!(p.gray, gray);
        assert_eq!(p.equalized, histogram_equalize(&gray));
        assert_eq!(p.binary, otsu_threshold(&histogram_equalize(&gray)).unwrap().1);
    }
}
