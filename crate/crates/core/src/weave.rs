//! Cross-over grid, warp-over/weft-over classification and weave pattern
//! recognition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{otsu_split, BinaryImage, GrayImage, Illumination};
use crate::wiener::{directional_filter, locate_yarns, YarnAxis, YarnOutlines};

/// Largest repeat period searched in either direction.
pub const MAX_REPEAT: usize = 8;
/// Smallest image side accepted by [`analyze_weave`].
pub const MIN_WEAVE_IMAGE_SIDE: usize = 128;
/// Yarn-to-yarn contrast, relative to the full intensity spread, above which
/// the two yarn systems cannot share one decomposition.
pub const MAX_YARN_CONTRAST: f64 = 0.5;
/// Agreement needed to accept a canonical weave when the matrix has no
/// exact repeat.
pub const MIN_PATTERN_AGREEMENT: f64 = 0.9;

/// Boolean interlacing matrix, `true` where the warp yarn lies over the weft.
/// Rows follow weft yarns (top to bottom), columns follow warp yarns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeaveMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl WeaveMatrix {
    pub fn new(rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "weave matrix {rows}x{cols} needs {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut cells = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                cells.push(f(i, j));
            }
        }
        Self::new(rows, cols, cells)
    }

    /// Parses rows of `T`/`F` (or `1`/`0`).
    pub fn parse(rows: &[&str]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut cells = Vec::new();
        for r in rows {
            if r.len() != cols {
                return Err(Error::InvalidInput("weave rows differ in length".into()));
            }
            for c in r.chars() {
                cells.push(match c {
                    'T' | 't' | '1' => true,
                    'F' | 'f' | '0' => false,
                    _ => return Err(Error::InvalidInput(format!("bad weave cell {c:?}"))),
                });
            }
        }
        Self::new(rows.len(), cols, cells)
    }

    pub fn plain() -> Self {
        Self::from_fn(2, 2, |i, j| (i + j) % 2 == 0).expect("static tile")
    }

    /// 3/1 twill: three risers per row, shifted one column per row.
    pub fn twill31() -> Self {
        Self::from_fn(4, 4, |i, j| (j + 4 - i % 4) % 4 != 3).expect("static tile")
    }

    /// 5-end satin with one riser per row, advancing `step` columns per row.
    pub fn satin5(step: usize) -> Result<Self> {
        if matches!(step % 5, 0 | 1 | 4) {
            return Err(Error::InvalidInput(format!("satin step must be 2 or 3 mod 5, got {step}")));
        }
        Self::from_fn(5, 5, |i, j| j == (i * step) % 5)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.cols + j]
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn inverted(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, cells: self.cells.iter().map(|c| !c).collect() }
    }

    /// Cyclic shift: the result at `(i, j)` is `self[(i + dr) % rows][(j + dc) % cols]`.
    pub fn shifted(&self, dr: usize, dc: usize) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get((i + dr) % self.rows, (j + dc) % self.cols)
        })
        .expect("same shape")
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, self.cols - 1 - j)).expect("same shape")
    }

    /// Every row and column holds at least one riser and one sinker.
    pub fn is_weavable(&self) -> bool {
        let rows_ok = (0..self.rows).all(|i| {
            let n = (0..self.cols).filter(|&j| self.get(i, j)).count();
            n > 0 && n < self.cols
        });
        let cols_ok = (0..self.cols).all(|j| {
            let n = (0..self.rows).filter(|&i| self.get(i, j)).count();
            n > 0 && n < self.rows
        });
        rows_ok && cols_ok
    }

    /// Rows as `T`/`F` strings.
    pub fn to_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| if self.get(i, j) { 'T' } else { 'F' }).collect())
            .collect()
    }

    pub fn fraction_true(&self) -> f64 {
        self.cells.iter().filter(|&&c| c).count() as f64 / self.cells.len() as f64
    }

    fn is_periodic(&self, p: usize, q: usize) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == self.get(i % p, j % q)))
    }

    /// Fraction of cells equal to `tile` repeated from the origin.
    pub fn agreement(&self, tile: &WeaveMatrix) -> f64 {
        let same = (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) == tile.get(i % tile.rows, j % tile.cols))
            .count();
        same as f64 / self.cells.len() as f64
    }

    /// Smallest `(p, q)`, ordered by area then `p`, for which the matrix is
    /// exactly periodic, with `p, q <= MAX_REPEAT`.
    pub fn minimal_tile(&self) -> Option<WeaveMatrix> {
        candidate_periods(self.rows.min(MAX_REPEAT), self.cols.min(MAX_REPEAT))
            .into_iter()
            .find(|&(p, q)| self.is_periodic(p, q))
            .map(|(p, q)| self.top_left(p, q))
    }

    fn top_left(&self, p: usize, q: usize) -> WeaveMatrix {
        WeaveMatrix::from_fn(p, q, |i, j| self.get(i, j)).expect("non-empty tile")
    }

    /// Tile of size `p x q` built from the majority value at each residue.
    /// Ties resolve to `false`.
    fn majority_tile(&self, p: usize, q: usize) -> WeaveMatrix {
        let mut votes = vec![0i64; p * q];
        for i in 0..self.rows {
            for j in 0..self.cols {
                votes[(i % p) * q + j % q] += if self.get(i, j) { 1 } else { -1 };
            }
        }
        WeaveMatrix::new(p, q, votes.into_iter().map(|v| v > 0).collect()).expect("non-empty tile")
    }
}

impl Serialize for WeaveMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeaveMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        WeaveMatrix::parse(&refs).map_err(serde::de::Error::custom)
    }
}

fn candidate_periods(max_p: usize, max_q: usize) -> Vec<(usize, usize)> {
    let mut c: Vec<(usize, usize)> = (1..=max_p).flat_map(|p| (1..=max_q).map(move |q| (p, q))).collect();
    c.sort_by_key(|&(p, q)| (p * q, p, q));
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeaveClass {
    Plain11,
    Twill31,
    Satin5,
    Unknown,
}

impl std::fmt::Display for WeaveClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeaveClass::Plain11 => "plain 1/1",
            WeaveClass::Twill31 => "twill 3/1",
            WeaveClass::Satin5 => "satin 5",
            WeaveClass::Unknown => "unknown",
        })
    }
}

/// Which yarn system dominates the face of a twill or satin repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    Warp,
    Weft,
}

/// Outcome of pattern recognition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMatch {
    pub class: WeaveClass,
    pub repeat_tile: WeaveMatrix,
    /// Fraction of matrix cells agreeing with the repeat tile.
    pub confidence: f64,
    /// `Some` for twill and satin; a weft-faced twill is the 1/3 inversion.
    pub face: Option<Face>,
}

struct Canonical {
    class: WeaveClass,
    face: Option<Face>,
    tile: WeaveMatrix,
}

fn canonical_tiles() -> Vec<Canonical> {
    let mut out = vec![Canonical { class: WeaveClass::Plain11, face: None, tile: WeaveMatrix::plain() }];
    for base in [WeaveMatrix::twill31(), WeaveMatrix::twill31().mirrored()] {
        out.push(Canonical { class: WeaveClass::Twill31, face: Some(Face::Warp), tile: base.clone() });
        out.push(Canonical { class: WeaveClass::Twill31, face: Some(Face::Weft), tile: base.inverted() });
    }
    for step in [2, 3] {
        let base = WeaveMatrix::satin5(step).expect("valid step");
        out.push(Canonical { class: WeaveClass::Satin5, face: Some(Face::Warp), tile: base.inverted() });
        out.push(Canonical { class: WeaveClass::Satin5, face: Some(Face::Weft), tile: base });
    }
    out
}

fn equal_up_to_shift(a: &WeaveMatrix, b: &WeaveMatrix) -> bool {
    a.rows == b.rows
        && a.cols == b.cols
        && (0..a.rows).any(|dr| (0..a.cols).any(|dc| a.shifted(dr, dc) == *b))
}

/// Best canonical tile by agreement over all cyclic shifts.
fn best_canonical(m: &WeaveMatrix) -> Option<(Canonical, WeaveMatrix, f64)> {
    let mut best: Option<(Canonical, WeaveMatrix, f64)> = None;
    for c in canonical_tiles() {
        for dr in 0..c.tile.rows {
            for dc in 0..c.tile.cols {
                let t = c.tile.shifted(dr, dc);
                let a = m.agreement(&t);
                if best.as_ref().is_none_or(|(_, _, b)| a > *b) {
                    best = Some((Canonical { class: c.class, face: c.face, tile: c.tile.clone() }, t, a));
                }
            }
        }
    }
    best
}

/// Classifies a weave matrix. The minimal exact repeat is compared against
/// plain 1/1, twill 3/1 and satin 5 (both faces, both twill directions,
/// satin steps 2 and 3) under cyclic shifts. A matrix without an exact
/// repeat (or whose repeat is not canonical) is assigned the best canonical
/// weave if at least [`MIN_PATTERN_AGREEMENT`] of its cells agree.
pub fn match_pattern(m: &WeaveMatrix) -> PatternMatch {
    let exact = m.minimal_tile();
    if let Some(tile) = &exact {
        for c in canonical_tiles() {
            if equal_up_to_shift(tile, &c.tile) {
                return PatternMatch { class: c.class, repeat_tile: tile.clone(), confidence: 1.0, face: c.face };
            }
        }
    }
    if let Some((c, tile, a)) = best_canonical(m) {
        if a >= MIN_PATTERN_AGREEMENT {
            return PatternMatch { class: c.class, repeat_tile: tile, confidence: a, face: c.face };
        }
    }
    if let Some(tile) = exact {
        return PatternMatch { class: WeaveClass::Unknown, repeat_tile: tile, confidence: 1.0, face: None };
    }
    // no acceptable match: report the best-fitting small majority tile
    let (p_max, q_max) = ((m.rows / 2).clamp(1, MAX_REPEAT), (m.cols / 2).clamp(1, MAX_REPEAT));
    let mut best = (m.majority_tile(1, 1), 0.0);
    for (p, q) in candidate_periods(p_max, q_max) {
        let t = m.majority_tile(p, q);
        let a = m.agreement(&t);
        if a > best.1 {
            best = (t, a);
        }
    }
    PatternMatch { class: WeaveClass::Unknown, repeat_tile: best.0, confidence: best.1, face: None }
}

pub fn recognize_pattern(m: &WeaveMatrix) -> WeaveClass {
    match_pattern(m).class
}

/// One cross-over window: inclusive pixel bounds and the summed binary
/// intensity inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossoverCell {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
    pub sum: u64,
}

impl CrossoverCell {
    pub fn area(&self) -> u64 {
        ((self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)) as u64
    }
}

/// Cells indexed `[weft stripe i][warp stripe j]`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CrossoverCell>,
}

impl CrossoverGrid {
    pub fn cell(&self, i: usize, j: usize) -> &CrossoverCell {
        &self.cells[i * self.cols + j]
    }
}

/// Intersects every weft stripe with every warp stripe and sums the binary
/// image over each window.
pub fn build_grid(warp: &YarnOutlines, weft: &YarnOutlines, img: &BinaryImage) -> Result<CrossoverGrid> {
    if warp.axis != YarnAxis::Warp || weft.axis != YarnAxis::Weft {
        return Err(Error::InvalidInput("build_grid expects warp then weft outlines".into()));
    }
    if warp.is_empty() || weft.is_empty() {
        return Err(Error::DecompositionFailed(format!(
            "no yarn boundaries found ({} warp, {} weft stripes)",
            warp.len(),
            weft.len()
        )));
    }
    let fits = warp.stripes.iter().all(|&(_, e)| e < img.width())
        && weft.stripes.iter().all(|&(_, e)| e < img.height());
    if !fits {
        return Err(Error::InvalidInput("yarn stripes extend beyond the binary image".into()));
    }
    let mut cells = Vec::with_capacity(warp.len() * weft.len());
    for &(y0, y1) in &weft.stripes {
        for &(x0, x1) in &warp.stripes {
            let sum = (y0..=y1)
                .map(|y| img.row(y)[x0..=x1].iter().map(|&p| p as u64).sum::<u64>())
                .sum();
            cells.push(CrossoverCell { x0, x1, y0, y1, sum });
        }
    }
    Ok(CrossoverGrid { rows: weft.len(), cols: warp.len(), cells })
}

/// Splits cells by Otsu on their mean binary intensity (sum over area, so
/// cells of unequal size compare fairly). The brighter class is warp-over.
pub fn classify_crossovers(g: &CrossoverGrid) -> Result<WeaveMatrix> {
    if g.cells.is_empty() {
        return Err(Error::InvalidInput("empty cross-over grid".into()));
    }
    let means: Vec<f64> = g.cells.iter().map(|c| c.sum as f64 / c.area() as f64).collect();
    let t = otsu_split(&means).ok_or(Error::IndeterminatePattern)?;
    WeaveMatrix::new(g.rows, g.cols, means.iter().map(|&m| m > t).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeaveOptions {
    pub illumination: Illumination,
    /// Maps the darker cross-over class to warp-over instead.
    pub invert_crossovers: bool,
}

impl Default for WeaveOptions {
    fn default() -> Self {
        Self { illumination: Illumination::Transmitted, invert_crossovers: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeaveAnalysis {
    pub warp: YarnOutlines,
    pub weft: YarnOutlines,
    pub grid: CrossoverGrid,
    pub matrix: WeaveMatrix,
    pub pattern: PatternMatch,
}

/// Three-class Otsu on a histogram: class means in ascending order.
fn three_class_means(hist: &[u64; 256]) -> Option<[f64; 3]> {
    let mut n = [0f64; 257];
    let mut s = [0f64; 257];
    for l in 0..256 {
        n[l + 1] = n[l] + hist[l] as f64;
        s[l + 1] = s[l] + l as f64 * hist[l] as f64;
    }
    let class = |a: usize, b: usize| (n[b] - n[a], s[b] - s[a]);
    let mut best: Option<(f64, [f64; 3])> = None;
    // classes [0, t1), [t1, t2), [t2, 256)
    for t1 in 1..255 {
        for t2 in t1 + 1..256 {
            let parts = [class(0, t1), class(t1, t2), class(t2, 256)];
            if parts.iter().any(|&(c, _)| c == 0.0) {
                continue;
            }
            let score: f64 = parts.iter().map(|&(c, sum)| sum * sum / c).sum();
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, parts.map(|(c, sum)| sum / c)));
            }
        }
    }
    best.map(|(_, m)| m)
}

/// Relative intensity distance between the two yarn systems: the gap is the
/// brightest class under transmitted light and the darkest under reflected.
pub fn yarn_contrast(img: &GrayImage, illumination: Illumination) -> Option<f64> {
    let [m0, m1, m2] = three_class_means(&img.histogram())?;
    let range = m2 - m0;
    if range <= 0.0 {
        return None;
    }
    Some(match illumination {
        Illumination::Transmitted => (m1 - m0) / range,
        Illumination::Reflected => (m2 - m1) / range,
    })
}

/// Otsu threshold of the original image computed only over pixels inside
/// cross-over windows, so that it separates the two yarn systems rather
/// than yarn from gap.
fn binarize_crossovers(img: &GrayImage, warp: &YarnOutlines, weft: &YarnOutlines) -> Result<BinaryImage> {
    let mut hist = [0u64; 256];
    for &(y0, y1) in &weft.stripes {
        for y in y0..=y1 {
            let row = img.row(y);
            for &(x0, x1) in &warp.stripes {
                for &p in &row[x0..=x1] {
                    hist[p as usize] += 1;
                }
            }
        }
    }
    let t = crate::imgcore::otsu_threshold_value(&hist).map_err(|_| Error::IndeterminatePattern)?;
    let pixels = img.pixels().iter().map(|&p| (p > t) as u8).collect();
    Ok(BinaryImage::new(img.width(), img.height(), pixels)?.with_scale(img.scale()))
}

/// Yarn contrast check, directional decomposition and outline extraction
/// of both yarn systems. Returns `(warp, weft)`.
pub fn yarn_outlines(img: &GrayImage, illumination: Illumination) -> Result<(YarnOutlines, YarnOutlines)> {
    if img.width() < MIN_WEAVE_IMAGE_SIDE || img.height() < MIN_WEAVE_IMAGE_SIDE {
        return Err(Error::ImageTooSmall(format!(
            "weave analysis needs at least {MIN_WEAVE_IMAGE_SIDE}x{MIN_WEAVE_IMAGE_SIDE} px, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    match yarn_contrast(img, illumination) {
        Some(c) if c > MAX_YARN_CONTRAST => {
            return Err(Error::DecompositionFailed(format!(
                "warp and weft intensities differ by {:.0}% of the intensity range; yarn boundaries cannot be separated",
                c * 100.0
            )))
        }
        _ => {}
    }
    let warp = locate_yarns(&directional_filter(img, YarnAxis::Warp)?, YarnAxis::Warp, illumination)?;
    let weft = locate_yarns(&directional_filter(img, YarnAxis::Weft)?, YarnAxis::Weft, illumination)?;
    if warp.is_empty() || weft.is_empty() {
        return Err(Error::DecompositionFailed(format!(
            "outline extraction found {} warp and {} weft yarns",
            warp.len(),
            weft.len()
        )));
    }
    Ok((warp, weft))
}

/// Full weave pipeline: yarn outlines, cross-over grid, classification and
/// recognition.
pub fn analyze_weave(img: &GrayImage, opts: &WeaveOptions) -> Result<WeaveAnalysis> {
    let (warp, weft) = yarn_outlines(img, opts.illumination)?;
    let bin = binarize_crossovers(img, &warp, &weft)?;
    let grid = build_grid(&warp, &weft, &bin)?;
    let mut matrix = classify_crossovers(&grid)?;
    if opts.invert_crossovers {
        matrix = matrix.inverted();
    }
    let pattern = match_pattern(&matrix);
    Ok(WeaveAnalysis { warp, weft, grid, matrix, pattern })
}
