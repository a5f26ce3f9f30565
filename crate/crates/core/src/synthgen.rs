//! Synthetic fabric renderer with known densities, yarn widths, weave and
//! illumination, plus defect injection with exact ground-truth masks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::imgcore::Rect;
use crate::imgcore::{BinaryImage, GrayImage, Illumination};
use crate::weave::WeaveMatrix;

/// Pixel size used by the default specs, in cm/pixel.
pub const DEFAULT_SCALE: f64 = 0.002363;
/// Default yarn width as a fraction of the yarn spacing.
pub const DEFAULT_COVER: f64 = 0.6;

/// Intensities of the gap, warp and weft under one illumination mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Levels {
    pub gap: u8,
    pub warp: u8,
    pub weft: u8,
}

impl Levels {
    pub fn default_for(illumination: Illumination) -> Self {
        match illumination {
            Illumination::Transmitted => Levels { gap: 235, warp: 90, weft: 60 },
            Illumination::Reflected => Levels { gap: 30, warp: 200, weft: 175 },
        }
    }

    /// Two-tone fabric with a near-black warp and near-white weft.
    pub fn denim() -> Self {
        Levels { gap: 250, warp: 20, weft: 235 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    /// threads/cm
    pub warp_density: f64,
    pub weft_density: f64,
    /// mm
    pub warp_width: f64,
    pub weft_width: f64,
    pub weave: WeaveMatrix,
    /// cm/pixel
    pub scale: f64,
    pub illumination: Illumination,
    pub noise_sigma: f64,
    pub levels: Levels,
    pub seed: u64,
}

impl SynthSpec {
    /// 512x384 noise-free transmitted-light fabric at [`DEFAULT_SCALE`], with
    /// yarn widths at [`DEFAULT_COVER`] of the spacing.
    pub fn new(weave: WeaveMatrix, warp_density: f64, weft_density: f64) -> Self {
        Self {
            width: 512,
            height: 384,
            warp_density,
            weft_density,
            warp_width: DEFAULT_COVER * 10.0 / warp_density,
            weft_width: DEFAULT_COVER * 10.0 / weft_density,
            weave,
            scale: DEFAULT_SCALE,
            illumination: Illumination::Transmitted,
            noise_sigma: 0.0,
            levels: Levels::default_for(Illumination::Transmitted),
            seed: 0,
        }
    }

    /// Switches illumination and resets the levels to that mode's defaults.
    pub fn with_illumination(mut self, illumination: Illumination) -> Self {
        self.illumination = illumination;
        self.levels = Levels::default_for(illumination);
        self
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn warp_pitch_px(&self) -> f64 {
        1.0 / (self.warp_density * self.scale)
    }

    pub fn weft_pitch_px(&self) -> f64 {
        1.0 / (self.weft_density * self.scale)
    }

    pub fn warp_width_px(&self) -> f64 {
        self.warp_width / (10.0 * self.scale)
    }

    pub fn weft_width_px(&self) -> f64 {
        self.weft_width / (10.0 * self.scale)
    }

    /// Yarn spacing in mm for each axis.
    pub fn spacing_mm(&self) -> (f64, f64) {
        (10.0 / self.warp_density, 10.0 / self.weft_density)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.width == 0 || self.height == 0 {
            return bad(format!("image size {}x{} is empty", self.width, self.height));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        for (name, d) in [("warp density", self.warp_density), ("weft density", self.weft_density)] {
            if !(d.is_finite() && d > 0.0) {
                return bad(format!("{name} must be positive, got {d}"));
            }
        }
        for (name, w, pitch) in [
            ("warp", self.warp_width_px(), self.warp_pitch_px()),
            ("weft", self.weft_width_px(), self.weft_pitch_px()),
        ] {
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("{name} width must be positive"));
            }
            if w >= pitch {
                return bad(format!("{name} yarns overlap: width {w:.2} px >= pitch {pitch:.2} px"));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise sigma must be non-negative, got {}", self.noise_sigma));
        }
        let Levels { gap, warp, weft } = self.levels;
        if gap == warp || gap == weft || warp == weft {
            return bad(format!("levels must be distinct, got gap {gap}, warp {warp}, weft {weft}"));
        }
        let ordered = match self.illumination {
            Illumination::Transmitted => gap > warp && gap > weft,
            Illumination::Reflected => gap < warp && gap < weft,
        };
        if !ordered {
            return bad(format!(
                "gap level {gap} must be the {} level under {:?} illumination",
                if self.illumination == Illumination::Transmitted { "brightest" } else { "darkest" },
                self.illumination
            ));
        }
        Ok(())
    }
}

/// Index of the yarn covering coordinate `c`, if any.
fn yarn_at(c: usize, pitch: f64, width: f64) -> Option<usize> {
    let u = c as f64 + 0.5 - (pitch - width) / 2.0;
    if u < 0.0 {
        return None;
    }
    let k = (u / pitch).floor();
    (u - k * pitch < width).then_some(k as usize)
}

/// Geometry of one rendering: yarn widths and the weave tile.
struct Layout<'a> {
    spec: &'a SynthSpec,
    warp_width: f64,
    weft_width: f64,
    tile: &'a WeaveMatrix,
}

impl Layout<'_> {
    fn level(&self, x: usize, y: usize) -> u8 {
        let s = self.spec;
        let warp = yarn_at(x, s.warp_pitch_px(), self.warp_width);
        let weft = yarn_at(y, s.weft_pitch_px(), self.weft_width);
        match (warp, weft) {
            (Some(j), Some(i)) => {
                if self.tile.get(i % self.tile.rows(), j % self.tile.cols()) {
                    s.levels.warp
                } else {
                    s.levels.weft
                }
            }
            (Some(_), None) => s.levels.warp,
            (None, Some(_)) => s.levels.weft,
            (None, None) => s.levels.gap,
        }
    }
}

/// Per-pixel noise in raster order, identical for every render of a spec.
fn noise_field(spec: &SynthSpec) -> Option<Vec<f64>> {
    if spec.noise_sigma == 0.0 {
        return None;
    }
    let normal = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Some((0..spec.width * spec.height).map(|_| normal.sample(&mut rng)).collect())
}

fn add_noise(v: u8, n: Option<f64>) -> u8 {
    match n {
        Some(n) => (v as f64 + n).round().clamp(0.0, 255.0) as u8,
        None => v,
    }
}

fn clean_render(spec: &SynthSpec) -> Vec<u8> {
    let layout = Layout { spec, warp_width: spec.warp_width_px(), weft_width: spec.weft_width_px(), tile: &spec.weave };
    let mut out = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            out.push(layout.level(x, y));
        }
    }
    out
}

/// Renders flat-topped yarn stripes at exact pitch. At each intersection
/// the weave tile (`[weft index][warp index]`, `true` = warp on top) picks
/// the visible yarn. Gaussian noise is added and clamped.
pub fn render_fabric(spec: &SynthSpec) -> Result<GrayImage> {
    spec.validate()?;
    let noise = noise_field(spec);
    let pixels = clean_render(spec)
        .into_iter()
        .enumerate()
        .map(|(i, v)| add_noise(v, noise.as_ref().map(|n| n[i])))
        .collect();
    GrayImage::new(spec.width, spec.height, pixels)?.with_scale(spec.scale)
}

/// A textureless cloth at one level with seeded Gaussian noise, the ground
/// for defect fixtures.
pub fn render_uniform_cloth(
    width: usize,
    height: usize,
    level: u8,
    noise_sigma: f64,
    seed: u64,
) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidSpec(format!("image size {width}x{height} is empty")));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidSpec(format!("noise sigma {noise_sigma} must be >= 0")));
    }
    let pixels = if noise_sigma == 0.0 {
        vec![level; width * height]
    } else {
        let normal = Normal::new(0.0, noise_sigma).expect("checked sigma");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..width * height).map(|_| add_noise(level, Some(normal.sample(&mut rng)))).collect()
    };
    GrayImage::new(width, height, pixels)?.with_scale(DEFAULT_SCALE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectKind {
    /// Region filled with a constant level, normally the gap level.
    Hole,
    /// Region darkened by a constant amount.
    Stain,
    /// Weft yarns widened to twice their width inside the region.
    Slub,
    /// Warp floats over every intersection inside the region.
    Float,
}

/// Injects a defect into a render of `spec`. `level` is the fill value for
/// holes and the darkening amount for stains; it is ignored for slubs and
/// floats. Returns the modified image and a mask with 1 on defect pixels.
pub fn inject_defect(
    img: &GrayImage,
    spec: &SynthSpec,
    kind: DefectKind,
    region: Rect,
    level: u8,
) -> Result<(GrayImage, BinaryImage)> {
    if region.width == 0
        || region.height == 0
        || region.x + region.width > img.width()
        || region.y + region.height > img.height()
    {
        return Err(Error::InvalidRegion(format!(
            "{region:?} does not fit a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    let w = img.width();
    let mut out = img.clone();
    let mut mask = vec![false; img.len()];
    match kind {
        DefectKind::Hole | DefectKind::Stain => {
            for y in region.y..region.y + region.height {
                for x in region.x..region.x + region.width {
                    let p = &mut out.pixels_mut()[y * w + x];
                    *p = match kind {
                        DefectKind::Hole => level,
                        _ => p.saturating_sub(level),
                    };
                    mask[y * w + x] = true;
                }
            }
        }
        DefectKind::Slub | DefectKind::Float => {
            if (spec.width, spec.height) != (img.width(), img.height()) {
                return Err(Error::InvalidInput("image and spec sizes differ".into()));
            }
            spec.validate()?;
            let all_warp = WeaveMatrix::new(1, 1, vec![true]).expect("1x1 tile");
            let normal = Layout { spec, warp_width: spec.warp_width_px(), weft_width: spec.weft_width_px(), tile: &spec.weave };
            let defect = match kind {
                DefectKind::Slub => Layout {
                    weft_width: (2.0 * spec.weft_width_px()).min(spec.weft_pitch_px()),
                    ..normal
                },
                _ => Layout { tile: &all_warp, ..normal },
            };
            let noise = noise_field(spec);
            for y in region.y..region.y + region.height {
                for x in region.x..region.x + region.width {
                    let v = defect.level(x, y);
                    if v != normal.level(x, y) {
                        let i = y * w + x;
                        out.pixels_mut()[i] = add_noise(v, noise.as_ref().map(|n| n[i]));
                        mask[i] = true;
                    }
                }
            }
        }
    }
    let mask = BinaryImage::from_fn(w, img.height(), |x, y| mask[y * w + x])?.with_scale(img.scale());
    Ok((out, mask))
}
