//! Annotated PNG renderings of outlines and cross-over classes.

use loomscan::imgcore::{GrayImage, Rgb, RgbImage};
use loomscan::weave::{CrossoverGrid, WeaveMatrix};
use loomscan::wiener::{YarnAxis, YarnOutlines};

const OUTLINE: Rgb<u8> = Rgb([0, 200, 0]);
const WARP_OVER: [f32; 3] = [255.0, 60.0, 60.0];
const WEFT_OVER: [f32; 3] = [60.0, 60.0, 255.0];
const TINT: f32 = 0.35;

/// Stripe edges drawn as full-length green lines.
pub fn outlines(img: &GrayImage, o: &YarnOutlines) -> RgbImage {
    let mut out = img.to_rgb();
    let (w, h) = (img.width() as u32, img.height() as u32);
    for &(s, e) in &o.stripes {
        for edge in [s as u32, e as u32] {
            match o.axis {
                YarnAxis::Warp => (0..h).for_each(|y| out.put_pixel(edge, y, OUTLINE)),
                YarnAxis::Weft => (0..w).for_each(|x| out.put_pixel(x, edge, OUTLINE)),
            }
        }
    }
    out
}

/// Cross-over cells tinted red where the warp is on top, blue otherwise.
pub fn crossovers(img: &GrayImage, grid: &CrossoverGrid, matrix: &WeaveMatrix) -> RgbImage {
    let mut out = img.to_rgb();
    for i in 0..grid.rows.min(matrix.rows()) {
        for j in 0..grid.cols.min(matrix.cols()) {
            let c = grid.cell(i, j);
            let color = if matrix.get(i, j) { WARP_OVER } else { WEFT_OVER };
            for y in c.y0..=c.y1 {
                for x in c.x0..=c.x1 {
                    let p = out.get_pixel_mut(x as u32, y as u32);
                    for (c, &t) in p.0.iter_mut().zip(&color) {
                        *c = ((1.0 - TINT) * *c as f32 + TINT * t).round() as u8;
                    }
                }
            }
        }
    }
    out
}
