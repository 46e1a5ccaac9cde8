//! Vector-sketch data model: polyline strokes on a square canvas.
//!
//! Sketches come in from Quick-draw style stroke files (one drawing per
//! record, each stroke a pair of x/y coordinate lists), get normalized into
//! an `s`×`s` canvas with a margin that keeps stroke ink and corner discs
//! fully on-canvas, and feed both label synthesis and graph rendering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in canvas coordinates. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

impl From<Point> for (f64, f64) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

/// An ordered run of at least two points with distinct consecutive entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Polyline(Vec<Point>);

impl Polyline {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        for p in &points {
            if !p.is_finite() {
                return Err(Error::InvalidInput("non-finite point".into()));
            }
        }
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(
                    "consecutive polyline points must be distinct".into(),
                ));
            }
        }
        Ok(Polyline(points))
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Consecutive-point segments of the polyline.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.0.windows(2).map(|w| Segment { a: w[0], b: w[1] })
    }

    fn map(&self, f: impl Fn(Point) -> Point) -> Polyline {
        Polyline(self.0.iter().map(|&p| f(p)).collect())
    }
}

impl TryFrom<Vec<Point>> for Polyline {
    type Error = Error;
    fn try_from(points: Vec<Point>) -> Result<Self> {
        Polyline::new(points)
    }
}

impl From<Polyline> for Vec<Point> {
    fn from(p: Polyline) -> Self {
        p.0
    }
}

/// A drawing: a list of strokes plus the canvas it has been normalized to.
/// `canvas_size == 0` means the coordinates are still raw (unnormalized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub canvas_size: u32,
    pub strokes: Vec<Polyline>,
}

impl Sketch {
    pub fn new(strokes: Vec<Polyline>) -> Self {
        Sketch {
            canvas_size: 0,
            strokes,
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.canvas_size > 0
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.strokes.iter().flat_map(|s| s.points().iter().copied())
    }

    /// Tight axis-aligned bounding box, or None for an empty sketch.
    pub fn bbox(&self) -> Option<(Point, Point)> {
        let mut it = self.points();
        let first = it.next()?;
        let (mut min, mut max) = (first, first);
        for p in it {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Some((min, max))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sketch serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Sketch> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A closed line segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a == b {
            return Err(Error::DegeneratePair);
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }
}

/// Input stroke-file flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrokeFormat {
    /// One JSON object per line with a `drawing` field of `[x-list, y-list]` pairs.
    NdjsonSimplified,
    /// A single JSON array of the same record objects.
    PlainJson,
}

/// Parsed drawings plus warning metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSketches {
    pub sketches: Vec<Sketch>,
    /// Strokes dropped for having fewer than 2 distinct points.
    pub skipped_strokes: usize,
}

#[derive(Deserialize)]
struct DrawingRecord {
    drawing: Vec<(Vec<f64>, Vec<f64>)>,
}

fn record_to_sketch(record: DrawingRecord, index: usize, skipped: &mut usize) -> Result<Sketch> {
    if record.drawing.is_empty() {
        return Err(Error::Parse {
            record: index,
            message: "drawing has no strokes".into(),
        });
    }
    let mut strokes = Vec::with_capacity(record.drawing.len());
    for (xs, ys) in record.drawing {
        if xs.len() != ys.len() {
            return Err(Error::Parse {
                record: index,
                message: format!("stroke x/y lists differ in length ({} vs {})", xs.len(), ys.len()),
            });
        }
        let mut points: Vec<Point> = Vec::with_capacity(xs.len());
        for (&x, &y) in xs.iter().zip(&ys) {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Parse {
                    record: index,
                    message: "non-finite coordinate".into(),
                });
            }
            let p = Point::new(x, y);
            // Collapse exact consecutive duplicates so the polyline invariant holds.
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        if points.len() < 2 {
            *skipped += 1;
            continue;
        }
        strokes.push(Polyline(points));
    }
    Ok(Sketch::new(strokes))
}

/// Parse a Quick-draw style stroke file into raw (unnormalized) sketches.
pub fn parse_stroke_file(bytes: &[u8], format: StrokeFormat) -> Result<ParsedSketches> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        record: 0,
        message: format!("not valid UTF-8: {e}"),
    })?;
    let mut skipped = 0usize;
    let mut sketches = Vec::new();
    match format {
        StrokeFormat::NdjsonSimplified => {
            for (index, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
                let record: DrawingRecord =
                    serde_json::from_str(line).map_err(|e| Error::Parse {
                        record: index,
                        message: e.to_string(),
                    })?;
                sketches.push(record_to_sketch(record, index, &mut skipped)?);
            }
        }
        StrokeFormat::PlainJson => {
            if text.trim().is_empty() {
                return Ok(ParsedSketches {
                    sketches,
                    skipped_strokes: skipped,
                });
            }
            let records: Vec<DrawingRecord> =
                serde_json::from_str(text).map_err(|e| Error::Parse {
                    record: 0,
                    message: e.to_string(),
                })?;
            for (index, record) in records.into_iter().enumerate() {
                sketches.push(record_to_sketch(record, index, &mut skipped)?);
            }
        }
    }
    Ok(ParsedSketches {
        sketches,
        skipped_strokes: skipped,
    })
}

/// Canvas margin that keeps stroke ink and corner discs fully on-canvas.
pub fn margin_px(stroke_width: f64, corner_radius: f64) -> f64 {
    stroke_width.ceil() + corner_radius
}

/// Fit the sketch into an `s`×`s` canvas: uniform scale, centered, with the
/// given margin on all sides. Preserves aspect ratio; sets `canvas_size`.
pub fn normalize_with_margin(sketch: &Sketch, s: u32, margin: f64) -> Result<Sketch> {
    if sketch.strokes.is_empty() {
        return Err(Error::InvalidInput("empty sketch".into()));
    }
    if s < 32 {
        return Err(Error::InvalidInput(format!("canvas size {s} below minimum 32")));
    }
    let avail = s as f64 - 2.0 * margin;
    if avail <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "margin {margin} leaves no room on a {s}px canvas"
        )));
    }
    let (min, max) = sketch.bbox().expect("nonempty sketch has a bbox");
    let w = max.x - min.x;
    let h = max.y - min.y;
    let extent = w.max(h);
    if extent < 1e-12 {
        return Err(Error::ZeroExtent);
    }
    let scale = avail / extent;
    let off_x = margin + (avail - scale * w) / 2.0;
    let off_y = margin + (avail - scale * h) / 2.0;
    let strokes = sketch
        .strokes
        .iter()
        .map(|poly| {
            poly.map(|p| Point::new(off_x + scale * (p.x - min.x), off_y + scale * (p.y - min.y)))
        })
        .collect();
    Ok(Sketch {
        canvas_size: s,
        strokes,
    })
}

/// [`normalize_with_margin`] with the margin derived from stroke geometry.
pub fn normalize(sketch: &Sketch, s: u32, stroke_width: f64, corner_radius: f64) -> Result<Sketch> {
    normalize_with_margin(sketch, s, margin_px(stroke_width, corner_radius))
}

/// Unique proper intersection of two closed segments, if any.
///
/// Near-parallel pairs (|det| < 1e-12) and collinear overlaps yield None;
/// shared polyline vertices are handled by corner accumulation instead.
pub fn segment_intersection(s1: &Segment, s2: &Segment) -> Option<Point> {
    let r = (s1.b.x - s1.a.x, s1.b.y - s1.a.y);
    let q = (s2.b.x - s2.a.x, s2.b.y - s2.a.y);
    let det = r.0 * q.1 - r.1 * q.0;
    if det.abs() < 1e-12 {
        return None;
    }
    let d = (s2.a.x - s1.a.x, s2.a.y - s1.a.y);
    let t = (d.0 * q.1 - d.1 * q.0) / det;
    let u = (d.0 * r.1 - d.1 * r.0) / det;
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&u) {
        return None;
    }
    Some(Point::new(s1.a.x + t * r.0, s1.a.y + t * r.1))
}

/// Identifies one segment of one stroke.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentRef {
    pub stroke: usize,
    pub segment: usize,
}

/// A pairwise intersection, with the parametric position on both segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionHit {
    pub point: Point,
    pub first: SegmentRef,
    pub t_first: f64,
    pub second: SegmentRef,
    pub t_second: f64,
}

fn param_on(seg: &Segment, p: Point) -> f64 {
    let dx = seg.b.x - seg.a.x;
    let dy = seg.b.y - seg.a.y;
    let len2 = dx * dx + dy * dy;
    ((p.x - seg.a.x) * dx + (p.y - seg.a.y) * dy) / len2
}

fn share_endpoint(s1: &Segment, s2: &Segment) -> bool {
    s1.a == s2.a || s1.a == s2.b || s1.b == s2.a || s1.b == s2.b
}

/// All pairwise segment intersections across and within strokes, excluding
/// pairs that share a polyline vertex (their shared vertex is already a
/// corner). Deterministic order: by first segment, then second.
pub fn sketch_intersections(sketch: &Sketch) -> Vec<IntersectionHit> {
    let mut segs: Vec<(SegmentRef, Segment)> = Vec::new();
    for (si, stroke) in sketch.strokes.iter().enumerate() {
        for (gi, seg) in stroke.segments().enumerate() {
            segs.push((
                SegmentRef {
                    stroke: si,
                    segment: gi,
                },
                seg,
            ));
        }
    }
    let mut hits = Vec::new();
    for i in 0..segs.len() {
        for j in (i + 1)..segs.len() {
            let (ref_a, seg_a) = segs[i];
            let (ref_b, seg_b) = segs[j];
            if share_endpoint(&seg_a, &seg_b) {
                continue;
            }
            if let Some(p) = segment_intersection(&seg_a, &seg_b) {
                hits.push(IntersectionHit {
                    point: p,
                    first: ref_a,
                    t_first: param_on(&seg_a, p),
                    second: ref_b,
                    t_second: param_on(&seg_b, p),
                });
            }
        }
    }
    hits
}
