//! End-to-end measurements on rendered fabrics with known geometry.

use loomscan::defect::segment_defects;
use loomscan::density::measure_density;
use loomscan::fixtures::{canonical_tile, hole_fixture, HOLE_REGION, SAMPLE_FABRICS, SAMPLE_GEOMETRY};
use loomscan::metrics::{fabric_metrics, fractional_cover};
use loomscan::synthgen::render_fabric;
use loomscan::weave::{analyze_weave, yarn_outlines, WeaveOptions};
use loomscan::{DensityParams, Illumination, SynthSpec, WeaveClass, YarnAxis};

const CLASSES: [WeaveClass; 3] = [WeaveClass::Plain11, WeaveClass::Twill31, WeaveClass::Satin5];
const ILLUMINATIONS: [Illumination; 2] = [Illumination::Transmitted, Illumination::Reflected];

fn spec(class: WeaveClass, warp: f64, weft: f64) -> SynthSpec {
    SynthSpec::new(canonical_tile(class).unwrap(), warp, weft)
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want * 100.0
}

fn density_failures(noise: f64, tolerance: f64) -> Vec<String> {
    let mut failures = Vec::new();
    let p = DensityParams::default();
    for class in CLASSES {
        for warp in [20.0, 30.0, 40.0, 50.0, 60.0] {
            for weft in [20.0, 35.0, 60.0] {
                let s = spec(class, warp, weft).with_noise(noise, 3);
                let img = render_fabric(&s).unwrap();
                for (axis, want) in [(YarnAxis::Warp, warp), (YarnAxis::Weft, weft)] {
                    let got = measure_density(&img, axis, &p).map(|r| r.mean_threads_per_cm);
                    match got {
                        Ok(d) if rel_err(d, want) <= tolerance => {}
                        other => failures.push(format!("{class:?} {warp}/{weft} {axis}: {other:?}")),
                    }
                }
            }
        }
    }
    failures
}

#[test]
fn density_noise_free_within_one_percent() {
    let f = density_failures(0.0, 1.0);
    assert!(f.is_empty(), "{f:#?}");
}

#[test]
fn density_noisy_within_two_percent() {
    let f = density_failures(8.0, 2.0);
    assert!(f.is_empty(), "{f:#?}");
}

#[test]
fn weave_classes_recognized() {
    let mut failures = Vec::new();
    for class in CLASSES {
        for ill in ILLUMINATIONS {
            for (warp, weft) in [(25.0, 25.0), (30.0, 40.0), (45.0, 35.0)] {
                for noise in [0.0, 6.0] {
                    let s = spec(class, warp, weft).with_illumination(ill).with_noise(noise, 5);
                    let opts = WeaveOptions { illumination: ill, invert_crossovers: false };
                    let got = render_fabric(&s).and_then(|img| analyze_weave(&img, &opts)).map(|a| a.pattern.class);
                    if got.as_ref().ok() != Some(&class) {
                        failures.push(format!("{class:?} {ill:?} {warp}/{weft} noise {noise}: {got:?}"));
                    }
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn stripe_count_matches_density() {
    for class in CLASSES {
        for ill in ILLUMINATIONS {
            for (warp, weft) in [(25.0, 40.0), (40.0, 30.0)] {
                let s = spec(class, warp, weft).with_illumination(ill);
                let (wo, fo) = yarn_outlines(&render_fabric(&s).unwrap(), ill).unwrap();
                // interior stripes over the image extent, per cm
                let per_cm = |n: usize, extent: usize| n as f64 / (extent as f64 * s.scale);
                let warp_cm = per_cm(wo.len(), s.width);
                let weft_cm = per_cm(fo.len(), s.height);
                // border stripes are dropped: allow two yarns on top of one per cm
                let slack = |extent: usize| 1.0 + 2.0 / (extent as f64 * s.scale);
                assert!((warp_cm - warp).abs() <= slack(s.width), "{class:?} {ill:?} warp {warp_cm} vs {warp}");
                assert!((weft_cm - weft).abs() <= slack(s.height), "{class:?} {ill:?} weft {weft_cm} vs {weft}");
            }
        }
    }
}

#[test]
fn sample_diameters_recovered() {
    for (fabric, geo) in SAMPLE_FABRICS.iter().zip(&SAMPLE_GEOMETRY) {
        let mut s = SynthSpec::new(canonical_tile(fabric.structure).unwrap(), fabric.warp_threads_per_cm, fabric.weft_threads_per_cm);
        s.warp_width = geo.warp_diameter_mm;
        s.weft_width = geo.weft_diameter_mm;
        let (wo, fo) = yarn_outlines(&render_fabric(&s).unwrap(), Illumination::Transmitted).unwrap();
        let m = fabric_metrics(&wo, &fo).unwrap();
        for (got, want) in [(m.warp.mean_diameter_mm, geo.warp_diameter_mm), (m.weft.mean_diameter_mm, geo.weft_diameter_mm)] {
            assert!(rel_err(got, want) <= 15.0, "sample {}: {got} vs {want}", fabric.id);
        }
    }
}

#[test]
fn cover_recovered_within_ten_percent() {
    let mut failures = Vec::new();
    for ill in ILLUMINATIONS {
        let ratios: &[f64] = match ill {
            Illumination::Transmitted => &[0.3, 0.5, 0.7, 0.85],
            Illumination::Reflected => &[0.3, 0.5, 0.7, 0.9],
        };
        for &ratio in ratios {
            let mut s = spec(WeaveClass::Plain11, 30.0, 30.0).with_illumination(ill);
            s.warp_width = ratio * 10.0 / s.warp_density;
            s.weft_width = ratio * 10.0 / s.weft_density;
            let want = fractional_cover(s.warp_width, 10.0 / s.warp_density).unwrap().value;
            let got = render_fabric(&s)
                .and_then(|img| yarn_outlines(&img, ill))
                .and_then(|(wo, fo)| fabric_metrics(&wo, &fo));
            match got {
                Ok(m) if rel_err(m.warp.fractional_cover, want) <= 10.0 && rel_err(m.weft.fractional_cover, want) <= 10.0 => {}
                other => failures.push(format!("{ill:?} d/s {ratio}: {other:?}")),
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn one_percent_hole_found() {
    let (img, mask) = hole_fixture().unwrap();
    let regions = segment_defects(&img, 9).unwrap();
    assert_eq!(regions.len(), 1, "{regions:?}");
    let r = &regions[0];
    let truth = 100.0 * mask.count_ones() as f64 / img.len() as f64;
    let found = 100.0 * r.area_px as f64 / img.len() as f64;
    assert!((truth - 1.007).abs() < 0.001);
    assert!((found - truth).abs() <= 0.2, "{found} vs {truth}");
    let cx = HOLE_REGION.x as f64 + (HOLE_REGION.width as f64 - 1.0) / 2.0;
    let cy = HOLE_REGION.y as f64 + (HOLE_REGION.height as f64 - 1.0) / 2.0;
    assert!((r.centroid_px.0 - cx).hypot(r.centroid_px.1 - cy) <= 2.0);
}
