//! Structural metrics from yarn outlines: projected diameter, spacing,
//! English cotton count and tex, cover factors.
//!
//! Lengths are kept in mm. The count relation `d = 1 / (28 sqrt(Ne))` is
//! evaluated with `d` in inches and the cover factor `n / sqrt(Ne)` with
//! `n` in threads per inch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wiener::YarnOutlines;

pub const MM_PER_INCH: f64 = 25.4;
/// `tex * Ne` for cotton count.
pub const TEX_NE_PRODUCT: f64 = 590.5;
/// Constant of the diameter/count relation.
pub const DIAMETER_COUNT_CONSTANT: f64 = 28.0;

fn scale_of(o: &YarnOutlines) -> Result<f64> {
    match o.scale {
        Some(s) if s.is_finite() && s > 0.0 => Ok(s),
        Some(s) => Err(Error::InvalidScale(s)),
        None => Err(Error::InvalidInput("outlines carry no cm/pixel scale".into())),
    }
}

/// Mean projected stripe width in mm.
pub fn diameters_from_outlines(o: &YarnOutlines) -> Result<f64> {
    if o.stripes.is_empty() {
        return Err(Error::NoYarn);
    }
    let scale = scale_of(o)?;
    let total: f64 = o.stripes.iter().map(|&(s, e)| (e - s + 1) as f64).sum();
    Ok(total / o.stripes.len() as f64 * scale * 10.0)
}

/// Mean center-to-center distance of adjacent stripes in mm.
pub fn spacing_from_outlines(o: &YarnOutlines) -> Result<f64> {
    if o.stripes.len() < 2 {
        return Err(Error::InsufficientYarns { needed: 2, found: o.stripes.len() });
    }
    let scale = scale_of(o)?;
    let c = o.centers();
    let mean_px = (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64;
    Ok(mean_px * scale * 10.0)
}

/// English count and tex from a diameter in inches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YarnCount {
    pub ne: f64,
    pub tex: f64,
}

pub fn count_ne_from_diameter(d_inch: f64) -> Result<YarnCount> {
    if !(d_inch.is_finite() && d_inch > 0.0) {
        return Err(Error::InvalidDiameter(d_inch));
    }
    let ne = (1.0 / (DIAMETER_COUNT_CONSTANT * d_inch)).powi(2);
    Ok(YarnCount { ne, tex: TEX_NE_PRODUCT / ne })
}

/// Inverse of [`count_ne_from_diameter`]: diameter in inches.
pub fn diameter_from_ne(ne: f64) -> Result<f64> {
    if !(ne.is_finite() && ne > 0.0) {
        return Err(Error::InvalidInput(format!("yarn count must be positive, got {ne}")));
    }
    Ok(1.0 / (DIAMETER_COUNT_CONSTANT * ne.sqrt()))
}

/// `n / sqrt(Ne)` with `n` in threads per inch.
pub fn cover_factor(threads_per_inch: f64, ne: f64) -> Result<f64> {
    if !(threads_per_inch.is_finite() && threads_per_inch > 0.0 && ne.is_finite() && ne > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cover factor needs positive inputs, got n={threads_per_inch}, Ne={ne}"
        )));
    }
    Ok(threads_per_inch / ne.sqrt())
}

/// `d / s`, saturating at 1 when yarns touch or overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalCover {
    pub value: f64,
    pub saturated: bool,
}

pub fn fractional_cover(d: f64, s: f64) -> Result<FractionalCover> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidSpacing(s));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidDiameter(d));
    }
    let ratio = d / s;
    Ok(if ratio > 1.0 {
        FractionalCover { value: 1.0, saturated: true }
    } else {
        FractionalCover { value: ratio, saturated: false }
    })
}

/// `cw + cf - cw * cf`, clamped to `[max(cw, cf), 1]` against rounding.
pub fn total_cover(cw: f64, cf: f64) -> Result<f64> {
    for v in [cw, cf] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidFraction(v));
        }
    }
    Ok((cw + cf - cw * cf).clamp(cw.max(cf), 1.0))
}

/// Metrics of one yarn system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMetrics {
    pub yarns_measured: usize,
    pub mean_diameter_mm: f64,
    pub mean_spacing_mm: f64,
    pub count_ne: f64,
    pub count_tex: f64,
    pub density_threads_per_cm: f64,
    pub density_threads_per_inch: f64,
    pub cover_factor: f64,
    pub fractional_cover: f64,
    pub cover_saturated: bool,
}

pub fn axis_metrics(o: &YarnOutlines) -> Result<AxisMetrics> {
    let d = diameters_from_outlines(o)?;
    let s = spacing_from_outlines(o)?;
    let count = count_ne_from_diameter(d / MM_PER_INCH)?;
    let per_inch = MM_PER_INCH / s;
    let frac = fractional_cover(d, s)?;
    Ok(AxisMetrics {
        yarns_measured: o.stripes.len(),
        mean_diameter_mm: d,
        mean_spacing_mm: s,
        count_ne: count.ne,
        count_tex: count.tex,
        density_threads_per_cm: 10.0 / s,
        density_threads_per_inch: per_inch,
        cover_factor: cover_factor(per_inch, count.ne)?,
        fractional_cover: frac.value,
        cover_saturated: frac.saturated,
    })
}

/// Both yarn systems plus the total cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FabricMetrics {
    pub warp: AxisMetrics,
    pub weft: AxisMetrics,
    pub cover_total: f64,
}

pub fn fabric_metrics(warp: &YarnOutlines, weft: &YarnOutlines) -> Result<FabricMetrics> {
    let warp = axis_metrics(warp)?;
    let weft = axis_metrics(weft)?;
    Ok(FabricMetrics {
        cover_total: total_cover(warp.fractional_cover, weft.fractional_cover)?,
        warp,
        weft,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiener::YarnAxis;

    fn outlines(stripes: Vec<(usize, usize)>, scale: f64) -> YarnOutlines {
        YarnOutlines::new(YarnAxis::Warp, stripes, 1000, Some(scale)).unwrap()
    }

    #[test]
    fn diameter_of_single_stripe() {
        let d = diameters_from_outlines(&outlines(vec![(10, 14)], 0.002363)).unwrap();
        assert!((d - 0.11815).abs() < 1e-12);
        let d = diameters_from_outlines(&outlines(vec![(0, 3), (10, 15)], 0.01)).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(matches!(diameters_from_outlines(&outlines(vec![], 0.01)), Err(Error::NoYarn)));
    }

    #[test]
    fn spacing_values() {
        let s = spacing_from_outlines(&outlines(vec![(9, 11), (19, 21), (29, 31)], 0.01)).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        let s = spacing_from_outlines(&outlines(vec![(0, 4), (100, 104)], 0.002363)).unwrap();
        assert!((s - 2.363).abs() < 1e-12);
        assert!(matches!(
            spacing_from_outlines(&outlines(vec![(0, 4)], 0.01)),
            Err(Error::InsufficientYarns { .. })
        ));
    }

    #[test]
    fn count_from_diameter() {
        let c = count_ne_from_diameter(1.0 / 112.0).unwrap();
        assert!((c.ne - 16.0).abs() < 1e-12);
        assert!((c.tex * c.ne - TEX_NE_PRODUCT).abs() < 1e-9);
        assert!((count_ne_from_diameter(1.0 / 28.0).unwrap().ne - 1.0).abs() < 1e-12);
        assert!(count_ne_from_diameter(0.0).is_err());
    }

    #[test]
    fn cover_factor_values() {
        assert_eq!(cover_factor(56.0, 16.0).unwrap(), 14.0);
        assert_eq!(cover_factor(28.0, 1.0).unwrap(), 28.0);
        assert_eq!(cover_factor(112.0, 16.0).unwrap(), 2.0 * cover_factor(56.0, 16.0).unwrap());
        assert!(cover_factor(0.0, 1.0).is_err());
    }

    #[test]
    fn fractional_cover_values() {
        assert_eq!(fractional_cover(0.3, 0.3).unwrap().value, 1.0);
        assert_eq!(fractional_cover(0.2, 0.4).unwrap().value, 0.5);
        let f = fractional_cover(0.208, 0.373).unwrap();
        assert!((f.value - 0.5576).abs() < 1e-4);
        let f = fractional_cover(0.5, 0.4).unwrap();
        assert!(f.saturated && f.value == 1.0);
        assert!(matches!(fractional_cover(0.1, 0.0), Err(Error::InvalidSpacing(_))));
    }

    #[test]
    fn total_cover_values() {
        assert_eq!(total_cover(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(total_cover(0.5, 0.5).unwrap(), 0.75);
        assert_eq!(total_cover(0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(total_cover(1.2, 0.0), Err(Error::InvalidFraction(_))));
    }
}
