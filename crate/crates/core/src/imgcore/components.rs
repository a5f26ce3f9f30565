use super::BinaryImage;

/// Area of the 3x3 speck treated as noise after binarization.
pub const DEFAULT_SPECK_AREA: usize = 9;

/// An 8-connected set of pixels, stored as row-major indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub pixels: Vec<usize>,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// `(x_min, y_min, x_max, y_max)`, inclusive.
    pub fn bbox(&self, width: usize) -> (usize, usize, usize, usize) {
        let mut b = (usize::MAX, usize::MAX, 0, 0);
        for &i in &self.pixels {
            let (x, y) = (i % width, i / width);
            b.0 = b.0.min(x);
            b.1 = b.1.min(y);
            b.2 = b.2.max(x);
            b.3 = b.3.max(y);
        }
        b
    }

    /// Unweighted pixel centroid `(x, y)`.
    pub fn centroid(&self, width: usize) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let (sx, sy) = self.pixels.iter().fold((0.0, 0.0), |(sx, sy), &i| {
            (sx + (i % width) as f64, sy + (i / width) as f64)
        });
        (sx / n, sy / n)
    }
}

/// 8-connected components of the `true` pixels of a mask, in raster order
/// of their first pixel.
pub fn label_components(width: usize, height: usize, mask: &[bool]) -> Vec<Component> {
    debug_assert_eq!(mask.len(), width * height);
    let mut seen = vec![false; mask.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            pixels.push(i);
            let (x, y) = ((i % width) as isize, (i / width) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if mask[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        pixels.sort_unstable();
        out.push(Component { pixels });
    }
    out
}

/// Flips every 8-connected component of area `<= max_area` to the
/// opposite value. Yarn-valued (0) specks are removed first, then gap-valued
/// (1) specks on the result. A component covering the whole image is kept.
pub fn remove_small_components(img: &BinaryImage, max_area: usize) -> BinaryImage {
    if max_area == 0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let mut px = img.pixels().to_vec();
    for value in [0u8, 1u8] {
        let mask: Vec<bool> = px.iter().map(|&p| p == value).collect();
        for comp in label_components(w, h, &mask) {
            if comp.area() <= max_area && comp.area() < px.len() {
                for &i in &comp.pixels {
                    px[i] = 1 - value;
                }
            }
        }
    }
    BinaryImage::new(w, h, px)
        .expect("same dimensions, binary values")
        .with_scale(img.scale())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones_with_zeros(w: usize, h: usize, zeros: &[(usize, usize)]) -> BinaryImage {
        BinaryImage::from_fn(w, h, |x, y| !zeros.contains(&(x, y))).unwrap()
    }

    #[test]
    fn single_speck_removed() {
        let img = ones_with_zeros(10, 10, &[(4, 5)]);
        let out = remove_small_components(&img, DEFAULT_SPECK_AREA);
        assert_eq!(out.count_ones(), 100);
    }

    #[test]
    fn block_of_eight_is_removed() {
        let block: Vec<(usize, usize)> =
            (3..7).flat_map(|x| (4..6).map(move |y| (x, y))).collect();
        let img = ones_with_zeros(12, 12, &block);
        assert_eq!(img.count_ones(), 144 - 8);
        assert_eq!(remove_small_components(&img, 9).count_ones(), 144);
        assert_eq!(remove_small_components(&img, 7), img);
    }

    #[test]
    fn zero_max_area_is_noop() {
        let img = ones_with_zeros(6, 6, &[(1, 1), (4, 4)]);
        assert_eq!(remove_small_components(&img, 0), img);
    }

    #[test]
    fn diagonal_pixels_connect() {
        let mask = vec![true, false, false, true];
        assert_eq!(label_components(2, 2, &mask).len(), 1);
    }

    #[test]
    fn whole_image_component_survives() {
        let img = BinaryImage::new(2, 2, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(remove_small_components(&img, 9), img);
    }

    #[test]
    fn centroid_and_bbox() {
        let mask: Vec<bool> = (0..25).map(|i| (i % 5) >= 1 && (i % 5) <= 3 && i / 5 == 2).collect();
        let comps = label_components(5, 5, &mask);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].bbox(5), (1, 2, 3, 2));
        assert_eq!(comps[0].centroid(5), (2.0, 2.0));
    }
}
