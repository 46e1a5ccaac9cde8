//! Rasterization of sketches and synthesis of the 3-class ground-truth
//! labels: background, lines and corners. Corners are discs around stroke
//! vertices and pairwise intersections, clipped to ink so that
//! lines = ink − corners holds exactly.

use crate::error::{Error, Result};
use crate::eval::ProbabilityMap;
use crate::sketch::{sketch_intersections, Point, Sketch};

pub const CLASS_BACKGROUND: u8 = 0;
pub const CLASS_LINES: u8 = 1;
pub const CLASS_CORNERS: u8 = 2;
pub const NUM_CLASSES: usize = 3;

/// Row-major grayscale image with intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![0.0; (width * height) as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                (width as usize) * (height as usize),
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.pixels[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: f32) {
        self.pixels[(y * self.width + x) as usize] = value;
    }

    #[inline]
    fn set_clipped(&mut self, x: i64, y: i64, value: f32) {
        if x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height {
            self.set(x as u32, y as u32, value);
        }
    }

    /// Number of pixels above the ink threshold 0.5.
    pub fn ink_count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v > 0.5).count()
    }

    /// Hard-threshold into a {0, 1} image.
    pub fn binarize(&self, threshold: f32) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|&v| if v > threshold { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Row-major per-pixel hard class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelImage {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl LabelImage {
    pub fn new(width: u32, height: u32) -> Self {
        LabelImage {
            width,
            height,
            labels: vec![CLASS_BACKGROUND; (width * height) as usize],
        }
    }

    pub fn from_labels(width: u32, height: u32, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != (width as usize) * (height as usize) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} label image needs {} entries, got {}",
                width,
                height,
                (width as usize) * (height as usize),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c as usize >= NUM_CLASSES) {
            return Err(Error::InvalidInput(format!("label id {bad} out of range")));
        }
        Ok(LabelImage {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, class: u8) {
        self.labels[(y * self.width + x) as usize] = class;
    }

    pub fn class_count(&self, class: u8) -> usize {
        self.labels.iter().filter(|&&c| c == class).count()
    }

    /// Binary {0,1} image of one class.
    pub fn class_mask(&self, class: u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self
                .labels
                .iter()
                .map(|&c| if c == class { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn same_shape(&self, other: &LabelImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

fn bresenham(img: &mut GrayImage, a: Point, b: Point) {
    let (mut x0, mut y0) = (a.x.round() as i64, a.y.round() as i64);
    let (x1, y1) = (b.x.round() as i64, b.y.round() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        img.set_clipped(x0, y0, 1.0);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Draw one straight segment at the given width: a Bresenham core (keeps
/// thin lines connected) plus, for widths above 1, every pixel whose center
/// is within width/2 of the segment.
pub fn draw_segment(img: &mut GrayImage, a: Point, b: Point, width: f64) {
    bresenham(img, a, b);
    if width <= 1.0 {
        return;
    }
    let r = width / 2.0;
    let min_x = (a.x.min(b.x) - r - 1.0).floor().max(0.0) as u32;
    let max_x = (a.x.max(b.x) + r + 1.0).ceil().min(img.width as f64 - 1.0) as u32;
    let min_y = (a.y.min(b.y) - r - 1.0).floor().max(0.0) as u32;
    let max_y = (a.y.max(b.y) + r + 1.0).ceil().min(img.height as f64 - 1.0) as u32;
    for y in min_y..=max_y {
        for x in min_x..=max_x {
            if dist_to_segment(Point::new(x as f64, y as f64), a, b) <= r {
                img.set(x, y, 1.0);
            }
        }
    }
}

/// Render a normalized sketch as hard-edged binary ink.
pub fn rasterize(sketch: &Sketch, stroke_width: f64) -> Result<GrayImage> {
    if !sketch.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let s = sketch.canvas_size;
    let mut img = GrayImage::new(s, s);
    for stroke in &sketch.strokes {
        for seg in stroke.segments() {
            draw_segment(&mut img, seg.a, seg.b, stroke_width);
        }
    }
    Ok(img)
}

/// The accumulated corner set of a sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerSet {
    pub points: Vec<Point>,
    pub corner_radius: f64,
}

/// Deduplicates corner candidates: a candidate within `radius` of an
/// already-accepted corner resolves to that corner's index (first match in
/// insertion order wins), otherwise it is appended.
#[derive(Debug, Clone)]
pub struct CornerAccumulator {
    radius: f64,
    points: Vec<Point>,
}

impl CornerAccumulator {
    pub fn new(radius: f64) -> Self {
        CornerAccumulator {
            radius,
            points: Vec::new(),
        }
    }

    pub fn index_of(&mut self, p: Point) -> usize {
        for (i, q) in self.points.iter().enumerate() {
            if q.distance(p) <= self.radius {
                return i;
            }
        }
        self.points.push(p);
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

/// Corner candidates in canonical order: every polyline vertex of every
/// stroke, then every pairwise segment intersection.
pub fn collect_corners(sketch: &Sketch, corner_radius: f64) -> CornerSet {
    let mut acc = CornerAccumulator::new(corner_radius);
    for stroke in &sketch.strokes {
        for &p in stroke.points() {
            acc.index_of(p);
        }
    }
    for hit in sketch_intersections(sketch) {
        acc.index_of(hit.point);
    }
    CornerSet {
        points: acc.into_points(),
        corner_radius,
    }
}

/// Synthesize the input image and its 3-class label image.
///
/// Corner pixels are discs of `corner_radius` around corner points,
/// intersected with ink; line pixels are the remaining ink; everything
/// else is background.
pub fn make_labels(
    sketch: &Sketch,
    stroke_width: f64,
    corner_radius: f64,
) -> Result<(GrayImage, LabelImage)> {
    let x = rasterize(sketch, stroke_width)?;
    let corners = collect_corners(sketch, corner_radius);
    let mut labels = LabelImage::new(x.width(), x.height());
    for py in 0..x.height() {
        for px in 0..x.width() {
            if x.get(px, py) > 0.5 {
                labels.set(px, py, CLASS_LINES);
            }
        }
    }
    let r = corner_radius;
    for &c in &corners.points {
        let min_x = (c.x - r - 1.0).floor().max(0.0) as u32;
        let max_x = (c.x + r + 1.0).ceil().min(x.width() as f64 - 1.0) as u32;
        let min_y = (c.y - r - 1.0).floor().max(0.0) as u32;
        let max_y = (c.y + r + 1.0).ceil().min(x.height() as f64 - 1.0) as u32;
        for py in min_y..=max_y {
            for px in min_x..=max_x {
                let d = c.distance(Point::new(px as f64, py as f64));
                if d <= r && x.get(px, py) > 0.5 {
                    labels.set(px, py, CLASS_CORNERS);
                }
            }
        }
    }
    Ok((x, labels))
}

/// One-hot probability map from hard labels.
pub fn labels_to_probmap(labels: &LabelImage) -> ProbabilityMap {
    let n = (labels.width() as usize) * (labels.height() as usize);
    let mut probs = vec![0.0f32; NUM_CLASSES * n];
    for (i, &c) in labels.labels().iter().enumerate() {
        probs[c as usize * n + i] = 1.0;
    }
    ProbabilityMap::from_planes(NUM_CLASSES, labels.width(), labels.height(), probs)
        .expect("one-hot planes are well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::Polyline;

    fn sketch_on_canvas(s: u32, strokes: &[&[(f64, f64)]]) -> Sketch {
        Sketch {
            canvas_size: s,
            strokes: strokes
                .iter()
                .map(|pts| {
                    Polyline::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
                })
                .collect(),
        }
    }

    #[test]
    fn rasterize_horizontal_is_bresenham_run() {
        let sketch = sketch_on_canvas(20, &[&[(2.0, 5.0), (12.0, 5.0)]]);
        let img = rasterize(&sketch, 1.0).unwrap();
        for y in 0..20 {
            for x in 0..20 {
                let expected = y == 5 && (2..=12).contains(&x);
                assert_eq!(img.get(x, y) > 0.5, expected, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn rasterize_ink_is_positive() {
        let sketch = sketch_on_canvas(32, &[&[(3.0, 3.0), (28.0, 20.0)]]);
        let img = rasterize(&sketch, 2.0).unwrap();
        let sum: f32 = img.pixels().iter().sum();
        assert!(sum > 0.0);
        assert_eq!(sum as usize, img.ink_count());
    }

    #[test]
    fn rasterize_square_outline_pixel_count() {
        // 10x10 outline at width 1: 4 sides of 10 pixels minus 4 shared corners.
        let sketch = sketch_on_canvas(
            20,
            &[&[(5.0, 5.0), (14.0, 5.0), (14.0, 14.0), (5.0, 14.0), (5.0, 5.0)]],
        );
        let img = rasterize(&sketch, 1.0).unwrap();
        assert_eq!(img.ink_count(), 36);
    }

    #[test]
    fn rasterize_requires_normalized() {
        let mut sketch = sketch_on_canvas(20, &[&[(0.0, 0.0), (5.0, 5.0)]]);
        sketch.canvas_size = 0;
        assert!(matches!(rasterize(&sketch, 1.0), Err(Error::NotNormalized)));
    }

    #[test]
    fn corners_of_single_stroke() {
        let sketch = sketch_on_canvas(20, &[&[(2.0, 5.0), (12.0, 5.0)]]);
        let set = collect_corners(&sketch, 1.0);
        assert_eq!(set.points.len(), 2);
    }

    #[test]
    fn corners_of_x_cross() {
        let sketch = sketch_on_canvas(
            32,
            &[&[(2.0, 2.0), (28.0, 28.0)], &[(2.0, 28.0), (28.0, 2.0)]],
        );
        let set = collect_corners(&sketch, 1.0);
        assert_eq!(set.points.len(), 5);
        let center = set
            .points
            .iter()
            .filter(|p| p.distance(Point::new(15.0, 15.0)) < 1.0)
            .count();
        assert_eq!(center, 1);
    }

    #[test]
    fn corners_merge_shared_triangle_endpoints() {
        let sketch = sketch_on_canvas(
            64,
            &[
                &[(10.0, 10.0), (50.0, 10.0)],
                &[(50.4, 10.3), (30.0, 40.0)],
                &[(30.2, 40.2), (10.1, 10.2)],
            ],
        );
        let set = collect_corners(&sketch, 1.0);
        assert_eq!(set.points.len(), 3);
    }

    #[test]
    fn labels_partition_and_conserve_ink() {
        let sketch = sketch_on_canvas(32, &[&[(4.0, 16.0), (28.0, 16.0)]]);
        let (x, y) = make_labels(&sketch, 2.0, 3.0).unwrap();
        let ink = x.ink_count();
        let corners = y.class_count(CLASS_CORNERS);
        let lines = y.class_count(CLASS_LINES);
        let bg = y.class_count(CLASS_BACKGROUND);
        assert_eq!(corners + lines, ink);
        assert_eq!(corners + lines + bg, 32 * 32);
        assert!(corners > 0 && lines > 0);
    }

    #[test]
    fn labels_mark_endpoint_discs_as_corners() {
        let sketch = sketch_on_canvas(32, &[&[(4.0, 16.0), (28.0, 16.0)]]);
        let (x, y) = make_labels(&sketch, 2.0, 3.0).unwrap();
        let ends = [Point::new(4.0, 16.0), Point::new(28.0, 16.0)];
        for py in 0..32 {
            for px in 0..32 {
                if x.get(px, py) <= 0.5 {
                    assert_eq!(y.get(px, py), CLASS_BACKGROUND);
                    continue;
                }
                let p = Point::new(px as f64, py as f64);
                let near_end = ends.iter().any(|e| e.distance(p) <= 3.0);
                let expected = if near_end { CLASS_CORNERS } else { CLASS_LINES };
                assert_eq!(y.get(px, py), expected, "pixel ({px},{py})");
            }
        }
    }

    #[test]
    fn one_hot_probmap_roundtrip() {
        let sketch = sketch_on_canvas(32, &[&[(4.0, 4.0), (28.0, 24.0)]]);
        let (_, y) = make_labels(&sketch, 2.0, 3.0).unwrap();
        let p = labels_to_probmap(&y);
        for i in 0..(32 * 32) {
            let sum: f32 = (0..NUM_CLASSES).map(|c| p.probs()[c * 32 * 32 + i]).sum();
            assert_eq!(sum, 1.0);
        }
        let back = p.argmax_labels();
        assert_eq!(back, y);
    }

    #[test]
    fn blank_labels_probmap_is_background() {
        let y = LabelImage::new(8, 8);
        let p = labels_to_probmap(&y);
        assert!(p.probs()[..64].iter().all(|&v| v == 1.0));
        assert!(p.probs()[64..].iter().all(|&v| v == 0.0));
    }
}
