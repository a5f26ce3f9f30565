//! Frequency-domain pipeline: 2D FFT, amplitude spectrum and its display
//! mapping, frequency shift, band templates and template-filtered
//! reconstruction of warp-only / weft-only images.
//!
//! The forward transform is unnormalized; the inverse carries `1/(w*h)`.

pub use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::imgcore::GrayImage;
use crate::wiener::YarnAxis;

/// Default half-width of the pass band around the central line, in bins.
pub const DEFAULT_BAND_HALF_WIDTH: usize = 3;

/// 2D complex coefficients, row-major, with explicit layout tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    width: usize,
    height: usize,
    coefficients: Vec<Complex64>,
    centered: bool,
}

impl ComplexSpectrum {
    pub fn new(width: usize, height: usize, coefficients: Vec<Complex64>, centered: bool) -> Result<Self> {
        if width == 0 || height == 0 || coefficients.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "spectrum {width}x{height} with {} coefficients",
                coefficients.len()
            )));
        }
        Ok(Self { width, height, coefficients, centered })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.coefficients[v * self.width + u]
    }

    /// Position of the zero-frequency bin in the current layout.
    pub fn dc_position(&self) -> (usize, usize) {
        if self.centered {
            (self.width / 2, self.height / 2)
        } else {
            (0, 0)
        }
    }
}

/// A real-valued field over spectrum bins or pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

fn transform_2d(width: usize, height: usize, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    for row in data.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let mut column = vec![Complex64::default(); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        col_fft.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
}

/// Forward 2D DFT (unnormalized), natural layout.
pub fn fft2(img: &GrayImage) -> ComplexSpectrum {
    let (w, h) = (img.width(), img.height());
    let mut data: Vec<Complex64> = img.pixels().iter().map(|&p| Complex64::new(p as f64, 0.0)).collect();
    transform_2d(w, h, &mut data, false);
    ComplexSpectrum { width: w, height: h, coefficients: data, centered: false }
}

/// Inverse 2D DFT with `1/(w*h)` normalization. The spectrum must be in
/// natural layout.
pub fn ifft2(spec: &ComplexSpectrum) -> Result<Vec<Complex64>> {
    if spec.centered {
        return Err(Error::InvalidState("inverse transform needs natural layout".into()));
    }
    let mut data = spec.coefficients.clone();
    transform_2d(spec.width, spec.height, &mut data, true);
    let norm = 1.0 / (spec.width * spec.height) as f64;
    for c in &mut data {
        *c *= norm;
    }
    Ok(data)
}

/// `M(u,v) = sqrt(R^2 + I^2)` per bin.
pub fn amplitude(spec: &ComplexSpectrum) -> RealField {
    RealField {
        width: spec.width,
        height: spec.height,
        values: spec.coefficients.iter().map(|c| c.re.hypot(c.im)).collect(),
    }
}

/// `log2(M + 1)` per bin.
pub fn log_stretch(m: &RealField) -> Result<RealField> {
    if let Some(bad) = m.values.iter().find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::InvalidInput(format!("amplitude must be non-negative, got {bad}")));
    }
    Ok(RealField {
        width: m.width,
        height: m.height,
        values: m.values.iter().map(|v| (v + 1.0).log2()).collect(),
    })
}

/// Display mapping of a log-stretched field onto 0..=255.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeDisplay {
    pub width: usize,
    pub height: usize,
    pub values: Vec<u8>,
    pub t_min: f64,
    pub t_max: f64,
}

impl AmplitudeDisplay {
    pub fn to_image(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.values.clone()).expect("display dims are valid")
    }
}

/// `floor((s - t_min) / (t_max - t_min) * 255 + 0.5)`; a constant field
/// maps to 0.
pub fn rescale_display(s: &RealField) -> Result<AmplitudeDisplay> {
    if s.values.is_empty() {
        return Err(Error::InvalidInput("empty field".into()));
    }
    let t_min = s.values.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = t_max - t_min;
    let values = s
        .values
        .iter()
        .map(|&v| {
            if range > 0.0 {
                ((v - t_min) / range * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    Ok(AmplitudeDisplay { width: s.width, height: s.height, values, t_min, t_max })
}

/// Amplitude spectrum display image: `fft2 -> shift -> |F| -> log2 -> rescale`.
pub fn spectrum_display(img: &GrayImage) -> AmplitudeDisplay {
    let spec = fft_shift(&fft2(img));
    let stretched = log_stretch(&amplitude(&spec)).expect("moduli are non-negative");
    rescale_display(&stretched).expect("non-empty")
}

fn permute<T: Copy>(width: usize, height: usize, data: &[T], dx: usize, dy: usize) -> Vec<T> {
    let mut out = data.to_vec();
    for y in 0..height {
        let ny = (y + dy) % height;
        for x in 0..width {
            out[ny * width + (x + dx) % width] = data[y * width + x];
        }
    }
    out
}

/// Swaps quadrants so the zero frequency moves to `(w/2, h/2)`. On a
/// centered spectrum the exact inverse permutation is applied instead, so
/// the call toggles the layout for any dimensions.
pub fn fft_shift(spec: &ComplexSpectrum) -> ComplexSpectrum {
    let (w, h) = (spec.width, spec.height);
    let (dx, dy) = if spec.centered { (w - w / 2, h - h / 2) } else { (w / 2, h / 2) };
    ComplexSpectrum {
        width: w,
        height: h,
        coefficients: permute(w, h, &spec.coefficients, dx, dy),
        centered: !spec.centered,
    }
}

/// A 0/1 pass mask over spectrum bins.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTemplate {
    width: usize,
    height: usize,
    mask: Vec<u8>,
    axis: YarnAxis,
    half_width: usize,
    centered: bool,
}

impl FilterTemplate {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    pub fn axis(&self) -> YarnAxis {
        self.axis
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn ones(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1).count()
    }

    /// Same mask in the other layout.
    pub fn shifted(&self) -> FilterTemplate {
        let (w, h) = (self.width, self.height);
        let (dx, dy) = if self.centered { (w - w / 2, h - h / 2) } else { (w / 2, h / 2) };
        FilterTemplate {
            mask: permute(w, h, &self.mask, dx, dy),
            centered: !self.centered,
            ..self.clone()
        }
    }

    /// Builds a template from an explicit centered-layout mask.
    pub fn from_mask(width: usize, height: usize, mask: Vec<u8>, axis: YarnAxis) -> Result<Self> {
        if mask.len() != width * height || mask.iter().any(|&m| m > 1) {
            return Err(Error::InvalidInput("template mask must be 0/1 and match dims".into()));
        }
        Ok(Self { width, height, mask, axis, half_width: 0, centered: true })
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.mask.iter().map(|&m| m * 255).collect())
            .expect("template dims are valid")
    }
}

/// Centered-layout band through DC. Warp periodicity lies along the
/// horizontal frequency axis, so the warp template passes the full-width
/// rows within `half_width` of the DC row; the weft template passes the
/// full-height columns around the DC column.
pub fn band_template(width: usize, height: usize, axis: YarnAxis, half_width: usize) -> Result<FilterTemplate> {
    let (cx, cy) = (width / 2, height / 2);
    let limit = match axis {
        YarnAxis::Warp => height / 2,
        YarnAxis::Weft => width / 2,
    };
    if width == 0 || height == 0 || half_width > limit {
        return Err(Error::InvalidParams(format!(
            "band half-width {half_width} exceeds the half-extent {limit} of a {width}x{height} spectrum"
        )));
    }
    let mut mask = vec![0u8; width * height];
    for y in 0..height {
        for x in 0..width {
            let pass = match axis {
                YarnAxis::Warp => y.abs_diff(cy) <= half_width,
                YarnAxis::Weft => x.abs_diff(cx) <= half_width,
            };
            mask[y * width + x] = pass as u8;
        }
    }
    Ok(FilterTemplate { width, height, mask, axis, half_width, centered: true })
}

/// `InvF = F x TP`, back to natural layout, inverse FFT, modulus, then
/// `log2(M + 1)` and the display rescale onto 0..=255.
pub fn reconstruct(spec: &ComplexSpectrum, tp: &FilterTemplate) -> Result<GrayImage> {
    if spec.width != tp.width || spec.height != tp.height {
        return Err(Error::InvalidInput(format!(
            "template {}x{} does not match spectrum {}x{}",
            tp.width, tp.height, spec.width, spec.height
        )));
    }
    if spec.centered != tp.centered {
        return Err(Error::InvalidState(format!(
            "layout mismatch: spectrum centered={}, template centered={}",
            spec.centered, tp.centered
        )));
    }
    let product: Vec<Complex64> = spec
        .coefficients
        .iter()
        .zip(&tp.mask)
        .map(|(c, &m)| if m == 1 { *c } else { Complex64::default() })
        .collect();
    let mut filtered = ComplexSpectrum { coefficients: product, ..spec.clone() };
    if filtered.centered {
        filtered = fft_shift(&filtered);
    }
    let spatial = ifft2(&filtered)?;
    let modulus = RealField {
        width: spec.width,
        height: spec.height,
        values: spatial.iter().map(|c| c.re.hypot(c.im)).collect(),
    };
    let display = rescale_display(&log_stretch(&modulus)?)?;
    Ok(display.to_image())
}

/// Warp-only (or weft-only) reconstruction of an image with the default
/// centered band template.
pub fn reconstruct_axis(img: &GrayImage, axis: YarnAxis, half_width: usize) -> Result<GrayImage> {
    let spec = fft_shift(&fft2(img));
    let tp = band_template(img.width(), img.height(), axis, half_width)?;
    let mut out = reconstruct(&spec, &tp)?;
    out.set_scale(img.scale());
    Ok(out)
}
