//! Naive reference implementations used as oracles.
#![allow(dead_code)]

use loomscan::spectral::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use loomscan::GrayImage;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random::<u8>()).unwrap()
}

/// Random image with a handful of levels, so ties and empty bins occur.
pub fn random_coarse_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    let levels: Vec<u8> = (0..rng.random_range(2..6)).map(|_| rng.random()).collect();
    GrayImage::from_fn(w, h, |_, _| levels[rng.random_range(0..levels.len())]).unwrap()
}

/// Exhaustive Otsu: every threshold with two non-empty classes (`<= t`,
/// `> t`), between-class variance compared as exact fractions, first
/// maximum wins.
pub fn otsu_brute_force(img: &GrayImage) -> Option<u8> {
    let px = img.pixels();
    let n = px.len() as i128;
    let total: i128 = px.iter().map(|&p| p as i128).sum();
    // score(t) = (n*s0 - n0*total)^2 / (n0 * n1)
    let mut best: Option<(u8, i128, i128)> = None;
    for t in 0..=255u8 {
        let n0 = px.iter().filter(|&&p| p <= t).count() as i128;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: i128 = px.iter().filter(|&&p| p <= t).map(|&p| p as i128).sum();
        let num = (n * s0 - n0 * total).pow(2);
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    best.map(|b| b.0)
}

fn mirror(i: isize, n: usize) -> usize {
    // edge-repeating reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Window values around `(x, y)`; odd sizes are centered, even sizes extend
/// one further after the pixel.
pub fn window_values(img: &GrayImage, x: usize, y: usize, ww: usize, wh: usize) -> Vec<f64> {
    let x0 = x as isize - ((ww - 1) / 2) as isize;
    let y0 = y as isize - ((wh - 1) / 2) as isize;
    let mut v = Vec::with_capacity(ww * wh);
    for dy in 0..wh as isize {
        for dx in 0..ww as isize {
            v.push(img.get(mirror(x0 + dx, img.width()), mirror(y0 + dy, img.height())) as f64);
        }
    }
    v
}

pub fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
}

pub fn niblack_naive(img: &GrayImage, ww: usize, wh: usize, k: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(img.len());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (m, v) = mean_var(&window_values(img, x, y, ww, wh));
            t.push(m + k * v.sqrt());
        }
    }
    t
}

/// Clamped Wiener evaluation, pixel by pixel.
pub fn wiener_naive(img: &GrayImage, ww: usize, wh: usize, v2: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.len());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (mu, s2) = mean_var(&window_values(img, x, y, ww, wh));
            let l = img.get(x, y) as f64;
            let w = if s2 == 0.0 { mu } else { mu + (s2 - v2).max(0.0) / s2.max(v2) * (l - mu) };
            out.push(w.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn noise_variance_naive(img: &GrayImage, ww: usize, wh: usize) -> f64 {
    let mut total = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            total += mean_var(&window_values(img, x, y, ww, wh)).1;
        }
    }
    total / img.len() as f64
}

/// Direct O(N^2) forward DFT, unnormalized.
pub fn dft_naive(img: &GrayImage) -> Vec<Complex64> {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -2.0 * std::f64::consts::PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    acc += Complex64::from_polar(img.get(x, y) as f64, phase);
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Yarn count along a 0/1 line by scanning pixel by pixel: start at the
/// first change from pixel 0, count runs of the start value, stop at the
/// end of the last opposite-value run that is closed by another change.
pub fn count_yarns_scanner(line: &[u8]) -> (usize, Option<usize>, Option<usize>) {
    let Some(sp) = (1..line.len()).find(|&i| line[i] != line[0]) else {
        return (0, None, None);
    };
    let v = line[sp];
    let mut count = 0;
    let mut best: Option<(usize, usize)> = None;
    let mut yarns_so_far = 0;
    let mut i = sp;
    while i < line.len() {
        let start = i;
        while i < line.len() && line[i] == line[start] {
            i += 1;
        }
        let closed = i < line.len();
        if line[start] == v {
            yarns_so_far += 1;
        } else if closed {
            best = Some((i - 1, yarns_so_far));
        }
    }
    if let Some((ep, n)) = best {
        count = n;
        return (count, Some(sp), Some(ep));
    }
    (count, None, None)
}
