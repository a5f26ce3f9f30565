//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use loomscan::imgcore::{niblack_thresholds, otsu_threshold_value};
use loomscan::spectral::{amplitude, band_template, fft2, fft_shift, ifft2, log_stretch, rescale_display};
use loomscan::verify::{self, Check};
use loomscan::wiener::{wiener_filter, WienerParams};
use loomscan::{GrayImage, NiblackParams, YarnAxis};
use rand::Rng;

type Criterion = (u8, &'static str, Duration, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_checks(checks: Vec<Check>) -> Outcome {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    Outcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks", checks.len())
        } else {
            failed.join("; ")
        },
    }
}

fn otsu_and_niblack() -> Outcome {
    let mut r = rng(101);
    let mut otsu_bad = 0;
    for i in 0..100 {
        let img = if i % 2 == 0 { random_image(&mut r, 64, 64) } else { random_coarse_image(&mut r, 64, 64) };
        if otsu_threshold_value(&img.histogram()).ok() != otsu_brute_force(&img) {
            otsu_bad += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let img = random_image(&mut r, 48, 40);
        let p = NiblackParams::new(r.random_range(3..34), r.random_range(3..34), r.random_range(-1.0..1.0)).unwrap();
        let fast = niblack_thresholds(&img, &p).unwrap();
        let naive = niblack_naive(&img, p.window_w(), p.window_h(), p.k());
        worst = fast.iter().zip(&naive).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    Outcome {
        passed: otsu_bad == 0 && worst <= 1e-9,
        detail: format!("otsu mismatches {otsu_bad}/100, niblack max |dT| {worst:.1e}"),
    }
}

fn wiener_properties() -> Outcome {
    let mut r = rng(102);
    let img = random_image(&mut r, 32, 24);
    let identity = wiener_filter(&img, &WienerParams::new(5, 5, 0.0).unwrap()) == img;
    let flat = GrayImage::filled(32, 24, 77).unwrap();
    let fixed = [0.0, 50.0, 1e5].iter().all(|&v2| wiener_filter(&flat, &WienerParams::new(60, 5, v2).unwrap()) == flat);
    let mut naive_bad = 0;
    for i in 0..20 {
        let img = random_image(&mut r, 16, 16);
        let (ww, wh) = [(5, 3), (3, 5), (4, 7), (7, 2)][i % 4];
        let v2 = noise_variance_naive(&img, ww, wh);
        let out = wiener_filter(&img, &WienerParams::new(ww, wh, v2).unwrap());
        if out.pixels() != wiener_naive(&img, ww, wh, v2).as_slice() {
            naive_bad += 1;
        }
    }
    Outcome {
        passed: identity && fixed && naive_bad == 0,
        detail: format!("identity {identity}, fixed point {fixed}, naive mismatches {naive_bad}/20"),
    }
}

fn spectral_properties() -> Outcome {
    let mut r = rng(103);
    let (mut round_trip, mut parseval): (f64, f64) = (0.0, 0.0);
    let mut endpoints = true;
    for (w, h) in [(512, 384), (64, 48), (37, 23)] {
        let img = random_image(&mut r, w, h);
        let spec = fft2(&img);
        let back = ifft2(&spec).unwrap();
        round_trip = back.iter().zip(img.pixels()).map(|(c, &p)| (c - p as f64).norm()).fold(round_trip, f64::max);
        let energy: f64 = img.pixels().iter().map(|&p| (p as f64).powi(2)).sum();
        let spectral: f64 = spec.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>() / (w * h) as f64;
        parseval = parseval.max((energy - spectral).abs() / energy);
        let shown = rescale_display(&log_stretch(&amplitude(&fft_shift(&spec))).unwrap()).unwrap();
        endpoints &= shown.values.iter().min() == Some(&0) && shown.values.iter().max() == Some(&255);
    }
    let counts = [(512, 384), (33, 17)].iter().all(|&(w, h)| {
        (0..=8).all(|hw| {
            band_template(w, h, YarnAxis::Warp, hw).unwrap().ones() == (2 * hw + 1) * w
                && band_template(w, h, YarnAxis::Weft, hw).unwrap().ones() == (2 * hw + 1) * h
        })
    });
    Outcome {
        passed: round_trip <= 1e-6 && parseval <= 1e-6 && endpoints && counts,
        detail: format!("round trip {round_trip:.1e}, parseval {parseval:.1e}, endpoints {endpoints}, template counts {counts}"),
    }
}

fn determinism() -> Outcome {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_loomscan"))
            .arg("verify")
            .arg("--out")
            .arg(dir.path())
            .output()
            .expect("runs the binary");
        let file = std::fs::read(dir.path().join("verify.json")).unwrap_or_default();
        (out.status.code(), out.stdout, file)
    };
    let (a, b) = (run(), run());
    let identical = a.1 == b.1 && a.2 == b.2 && !a.1.is_empty();
    Outcome {
        passed: identical && a.0 == Some(0) && b.0 == Some(0),
        detail: format!("exit codes {:?}/{:?}, {} report bytes, identical {identical}", a.0, b.0, a.1.len()),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "worked density example", Duration::from_secs(1), || from_checks(verify::worked_example())),
        (2, "error table replay", Duration::from_secs(1), || from_checks(verify::comparison_table())),
        (3, "density pipeline on synthetic fabrics", Duration::from_secs(30), || from_checks(verify::density_suite())),
        (4, "weave recognition", Duration::from_secs(10), || from_checks(verify::weave_suite())),
        (5, "Otsu and Niblack oracles", Duration::from_secs(10), otsu_and_niblack),
        (6, "Wiener filter properties", Duration::from_secs(5), wiener_properties),
        (7, "spectral properties", Duration::from_secs(5), spectral_properties),
        (8, "yarn metrics", Duration::from_secs(1), || from_checks(verify::metrics_fixtures())),
        (9, "defect segmentation", Duration::from_secs(5), || from_checks(verify::defect_suite())),
        (10, "deterministic verify", Duration::from_secs(120), determinism),
    ];
    let mut failures = 0;
    for (n, name, budget, run) in criteria {
        let t = Instant::now();
        let o = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= budget;
        let ok = o.passed && in_time;
        failures += usize::from(!ok);
        let timing = if in_time { String::new() } else { format!(", over the {budget:?} budget") };
        println!(
            "{} criterion {n}: {name} ({}; {:.2}s{timing})",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
