//! Image containers and the shared preprocessing steps: grayscale
//! conversion, histogram equalization, Otsu and Niblack thresholding and
//! small-component cleanup.

mod components;
pub mod io;
mod threshold;
pub(crate) mod window;

pub use components::{label_components, remove_small_components, Component, DEFAULT_SPECK_AREA};
pub use threshold::{
    niblack_thresholds, niblack_threshold, otsu_split, otsu_threshold, otsu_threshold_value,
    NiblackParams,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use image::{Rgb, RgbImage};

/// Lighting geometry of the capture. Under transmitted light the gaps
/// between yarns are the brightest regions; under reflected light the
/// yarns are bright on dark gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Illumination {
    Transmitted,
    Reflected,
}

/// An 8-bit grayscale raster stored row-major, optionally carrying its
/// physical pixel size in cm/pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    scale: Option<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be non-zero, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "pixel buffer has {} values, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(Self { width, height, pixels, scale: None })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Attaches a physical scale in cm/pixel.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidScale(scale));
        }
        self.scale = Some(scale);
        Ok(self)
    }

    pub(crate) fn set_scale(&mut self, scale: Option<f64>) {
        self.scale = scale;
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Rotates the image 90° clockwise. This is an exact index permutation.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..w {
            for x in 0..h {
                pixels.push(self.get(y, h - 1 - x));
            }
        }
        GrayImage { width: h, height: w, pixels, scale: self.scale }
    }

    /// Mean intensity.
    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| p as f64).sum::<f64>() / self.len() as f64
    }

    /// Lower median intensity.
    pub fn median(&self) -> u8 {
        let hist = self.histogram();
        let target = (self.len() as u64).div_ceil(2);
        let mut acc = 0u64;
        for (level, &count) in hist.iter().enumerate() {
            acc += count;
            if acc >= target {
                return level as u8;
            }
        }
        255
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }

    pub fn to_rgb(&self) -> RgbImage {
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let v = self.get(x as usize, y as usize);
            image::Rgb([v, v, v])
        })
    }
}

/// A two-valued raster: 0 is yarn (dark foreground), 1 is gap or
/// cross-over region (light background).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    scale: Option<f64>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "binary image {width}x{height} with {} pixels",
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|&&p| p > 1) {
            return Err(Error::InvalidInput(format!("binary pixel value {bad} is not 0 or 1")));
        }
        Ok(Self { width, height, pixels, scale: None })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y) as u8);
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn with_scale(mut self, scale: Option<f64>) -> Self {
        self.scale = scale;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn column(&self, x: usize) -> Vec<u8> {
        (0..self.height).map(|y| self.get(x, y)).collect()
    }

    /// Swaps 0 and 1.
    pub fn inverted(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| 1 - p).collect(),
            scale: self.scale,
        }
    }

    pub fn count_ones(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1).count()
    }

    /// Renders 0 as black and 1 as white.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| p * 255).collect(),
            scale: self.scale,
        }
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self { x, y, width, height }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

/// Rec.601 luma, rounded half-up. Integer arithmetic keeps the rounding exact.
pub fn to_grayscale(image: &RgbImage) -> Result<GrayImage> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::InvalidInput("empty RGB image".into()));
    }
    let pixels = image
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0;
            let luma = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
            ((luma + 500) / 1000).min(255) as u8
        })
        .collect();
    GrayImage::new(w, h, pixels)
}

/// Classic CDF remap: `round((cdf(v) - cdf_min) / (N - cdf_min) * 255)`.
/// A single-level image is returned unchanged.
pub fn histogram_equalize(img: &GrayImage) -> GrayImage {
    let hist = img.histogram();
    let total = img.len() as u64;
    let cdf_min = hist.iter().copied().find(|&c| c > 0).unwrap_or(0);
    let denom = total - cdf_min;
    if denom == 0 {
        return img.clone();
    }
    let mut lut = [0u8; 256];
    let mut cdf = 0u64;
    for (level, &count) in hist.iter().enumerate() {
        cdf += count;
        if cdf < cdf_min {
            continue;
        }
        // half-up rounding of num / denom
        let num = (cdf - cdf_min) * 255;
        lut[level] = ((2 * num + denom) / (2 * denom)) as u8;
    }
    let mut out = img.clone();
    for p in out.pixels_mut() {
        *p = lut[*p as usize];
    }
    out
}
