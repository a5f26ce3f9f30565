//! Published reference data and the fixtures built from it.

use serde::Serialize;

use crate::error::Result;
use crate::imgcore::{BinaryImage, GrayImage, Rect};
use crate::synthgen::{inject_defect, render_uniform_cloth, DefectKind, SynthSpec};
use crate::weave::{WeaveClass, WeaveMatrix};

/// Automatic vs manual density of one fabric, threads/cm, with the printed
/// error percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityComparison {
    pub sample: &'static str,
    pub warp_automatic: f64,
    pub warp_manual: f64,
    pub weft_automatic: f64,
    pub weft_manual: f64,
    pub warp_error_percent: f64,
    pub weft_error_percent: f64,
}

const fn row(
    sample: &'static str,
    warp_automatic: f64,
    warp_manual: f64,
    weft_automatic: f64,
    weft_manual: f64,
    warp_error_percent: f64,
    weft_error_percent: f64,
) -> DensityComparison {
    DensityComparison {
        sample,
        warp_automatic,
        warp_manual,
        weft_automatic,
        weft_manual,
        warp_error_percent,
        weft_error_percent,
    }
}

pub const DENSITY_COMPARISONS: [DensityComparison; 15] = [
    row("P1", 53.7, 53.5, 37.2, 37.0, 0.37, 0.54),
    row("P2", 56.5, 56.5, 38.5, 38.5, 0.00, 0.00),
    row("P3", 61.1, 61.0, 39.0, 39.0, 0.16, 0.00),
    row("P4", 41.3, 41.5, 18.1, 18.0, 0.48, 0.56),
    row("P5", 65.6, 65.5, 39.3, 39.5, 0.15, 0.51),
    row("P6", 42.5, 42.5, 30.9, 31.0, 0.00, 0.32),
    row("P7", 47.2, 47.0, 21.6, 21.5, 0.43, 0.47),
    row("T1", 61.8, 62.0, 27.3, 27.5, 0.32, 0.73),
    row("T2", 48.4, 48.5, 36.3, 36.0, 0.21, 0.83),
    row("T3", 65.6, 65.5, 35.7, 35.5, 0.15, 0.56),
    row("T4", 50.2, 50.0, 21.5, 21.5, 0.40, 0.00),
    row("T5", 54.2, 54.0, 20.7, 20.5, 0.37, 0.98),
    row("S1", 99.6, 99.5, 78.3, 78.5, 0.10, 0.25),
    row("S2", 76.2, 76.0, 42.4, 42.5, 0.26, 0.24),
    row("S3", 87.9, 88.0, 44.7, 44.5, 0.11, 0.45),
];

/// Largest printed error of the comparison table, percent.
pub const MAX_PRINTED_ERROR_PERCENT: f64 = 0.98;

/// Worked density example: yarn count, start and end points, cm/pixel.
pub const WORKED_COUNT: usize = 42;
pub const WORKED_START: usize = 4;
pub const WORKED_END: usize = 506;
pub const WORKED_SCALE: f64 = 0.002363;
/// Published result of the worked example, threads/cm.
pub const WORKED_DENSITY: f64 = 35.3;

/// Manufacturer specification of one sample fabric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleFabric {
    pub id: u8,
    pub structure: WeaveClass,
    pub warp_threads_per_cm: f64,
    pub weft_threads_per_cm: f64,
    pub warp_tex: f64,
    pub weft_tex: f64,
}

pub const SAMPLE_FABRICS: [SampleFabric; 6] = [
    SampleFabric { id: 1, structure: WeaveClass::Plain11, warp_threads_per_cm: 26.0, weft_threads_per_cm: 35.0, warp_tex: 20.0, weft_tex: 28.0 },
    SampleFabric { id: 2, structure: WeaveClass::Plain11, warp_threads_per_cm: 30.0, weft_threads_per_cm: 26.0, warp_tex: 34.0, weft_tex: 34.0 },
    SampleFabric { id: 3, structure: WeaveClass::Twill31, warp_threads_per_cm: 37.0, weft_threads_per_cm: 20.0, warp_tex: 22.0, weft_tex: 16.0 },
    SampleFabric { id: 4, structure: WeaveClass::Twill31, warp_threads_per_cm: 26.0, weft_threads_per_cm: 31.0, warp_tex: 14.0, weft_tex: 20.0 },
    SampleFabric { id: 5, structure: WeaveClass::Satin5, warp_threads_per_cm: 27.0, weft_threads_per_cm: 18.0, warp_tex: 20.0, weft_tex: 14.0 },
    SampleFabric { id: 6, structure: WeaveClass::Satin5, warp_threads_per_cm: 57.0, weft_threads_per_cm: 29.0, warp_tex: 46.0, weft_tex: 42.0 },
];

/// Measured mean yarn diameter and spacing of one sample, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleGeometry {
    pub id: u8,
    pub warp_diameter_mm: f64,
    pub weft_diameter_mm: f64,
    pub warp_spacing_mm: f64,
    pub weft_spacing_mm: f64,
}

pub const SAMPLE_GEOMETRY: [SampleGeometry; 6] = [
    SampleGeometry { id: 1, warp_diameter_mm: 0.208, weft_diameter_mm: 0.170, warp_spacing_mm: 0.373, weft_spacing_mm: 0.356 },
    SampleGeometry { id: 2, warp_diameter_mm: 0.155, weft_diameter_mm: 0.155, warp_spacing_mm: 0.432, weft_spacing_mm: 0.406 },
    SampleGeometry { id: 3, warp_diameter_mm: 0.191, weft_diameter_mm: 0.239, warp_spacing_mm: 0.254, weft_spacing_mm: 0.533 },
    SampleGeometry { id: 4, warp_diameter_mm: 0.254, weft_diameter_mm: 0.191, warp_spacing_mm: 0.406, weft_spacing_mm: 0.432 },
    SampleGeometry { id: 5, warp_diameter_mm: 0.206, weft_diameter_mm: 0.241, warp_spacing_mm: 0.457, weft_spacing_mm: 0.559 },
    SampleGeometry { id: 6, warp_diameter_mm: 0.132, weft_diameter_mm: 0.147, warp_spacing_mm: 0.178, weft_spacing_mm: 0.432 },
];

/// Canonical repeat tile of a recognized class.
pub fn canonical_tile(class: WeaveClass) -> Option<WeaveMatrix> {
    match class {
        WeaveClass::Plain11 => Some(WeaveMatrix::plain()),
        WeaveClass::Twill31 => Some(WeaveMatrix::twill31()),
        WeaveClass::Satin5 => WeaveMatrix::satin5(2).ok(),
        WeaveClass::Unknown => None,
    }
}

/// One standard line of the worked example: background up to the start
/// point, then 42 yarn/gap pairs ending at the end point, then a partial
/// yarn cut by the border.
pub fn worked_example_line() -> Vec<u8> {
    let width = WORKED_END + 6;
    let span = WORKED_END - WORKED_START + 1;
    let runs = 2 * WORKED_COUNT;
    let mut line = vec![0u8; WORKED_START];
    for r in 0..runs {
        // 503 px over 84 runs: one run of 5 px, the rest 6 px
        let len = span * (r + 1) / runs - span * r / runs;
        line.extend(std::iter::repeat_n(u8::from(r % 2 == 0), len));
    }
    line.resize(width, 1);
    line
}

/// The worked-example line repeated on every row, carrying the example
/// scale. Yarns run vertically, so it is a warp fixture.
pub fn worked_example_image(height: usize) -> Result<BinaryImage> {
    let line = worked_example_line();
    Ok(BinaryImage::from_fn(line.len(), height, |x, _| line[x] == 1)?.with_scale(Some(WORKED_SCALE)))
}

/// Cloth level, noise and seed of the defect fixtures.
pub const CLOTH_LEVEL: u8 = 128;
pub const CLOTH_NOISE_SIGMA: f64 = 4.0;
pub const CLOTH_SEED: u64 = 7;
/// A 44x45 hole in a 512x384 cloth: 1.007% of the image.
pub const HOLE_REGION: Rect = Rect { x: 234, y: 170, width: 44, height: 45 };
pub const HOLE_LEVEL: u8 = 235;

/// Noisy uniform cloth with one bright hole. Returns the image and the
/// exact defect mask.
pub fn hole_fixture() -> Result<(GrayImage, BinaryImage)> {
    let cloth = render_uniform_cloth(512, 384, CLOTH_LEVEL, CLOTH_NOISE_SIGMA, CLOTH_SEED)?;
    let spec = SynthSpec::new(WeaveMatrix::plain(), 30.0, 30.0);
    inject_defect(&cloth, &spec, DefectKind::Hole, HOLE_REGION, HOLE_LEVEL)
}

/// Noisy uniform cloth with dark stains of 2x2, 5x5, 12x12, 30x30 and
/// 60x60 px and one 25x25 hole.
pub fn mixed_defect_fixture() -> Result<GrayImage> {
    let mut img = render_uniform_cloth(512, 384, CLOTH_LEVEL, CLOTH_NOISE_SIGMA, CLOTH_SEED)?;
    let spec = SynthSpec::new(WeaveMatrix::plain(), 30.0, 30.0);
    let stains = [(20, 20, 2), (80, 40, 5), (160, 60, 12), (260, 40, 30), (380, 200, 60)];
    for (x, y, side) in stains {
        img = inject_defect(&img, &spec, DefectKind::Stain, Rect::new(x, y, side, side), 90)?.0;
    }
    Ok(inject_defect(&img, &spec, DefectKind::Hole, Rect::new(60, 250, 25, 25), HOLE_LEVEL)?.0)
}
