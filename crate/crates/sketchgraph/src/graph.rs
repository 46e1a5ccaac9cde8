//! Stroke-graph interpretation from segmentation masks.
//!
//! Vertices are centroids of connected components in the corners channel.
//! A pair of vertices becomes an edge when its plausibility score — the mean
//! lines-channel response over a narrow rectangular mask between them —
//! exceeds a per-pair threshold tau. Rendering the proposed graph back to
//! ink and diffing it against the input yields absent/superfluous blobs that
//! drive a multiplicative per-pair threshold update, iterated a fixed number
//! of times.
//!
//! Two refinements on top of the raw score keep proposals aligned with the
//! adjacent-corner edge model used by the dataset sidecars:
//!
//! * pixels where the corners channel is active are excluded from the mask
//!   (the lines channel is by construction silent there, so including them
//!   only dilutes true edges); when the exclusion empties the mask the full
//!   mask is used as a fallback;
//! * pairs whose connecting segment passes through a third detected vertex
//!   score zero — the curve between them is already covered by the two
//!   adjacent pairs, exactly as sidecar edges are split at interior corners.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ProbabilityMap;
use crate::raster::{draw_segment, GrayImage, CLASS_CORNERS, CLASS_LINES};
use crate::sketch::Point;

/// Reference (beta, tau) presets for fixed-threshold interpretation.
pub const FIXED_TAU_PRESETS: [(f64, f64); 4] =
    [(2.0, 0.30), (3.0, 0.22), (5.0, 0.20), (7.0, 0.15)];

/// Pixel connectivity for component labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Inclusive integer bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub min_x: u32,
    pub min_y: u32,
    pub max_x: u32,
    pub max_y: u32,
}

impl Rect {
    /// Point containment with a fractional padding on all sides.
    pub fn contains_padded(&self, p: Point, pad: f64) -> bool {
        p.x >= self.min_x as f64 - pad
            && p.x <= self.max_x as f64 + pad
            && p.y >= self.min_y as f64 - pad
            && p.y <= self.max_y as f64 + pad
    }
}

/// One connected ink region.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub pixel_count: usize,
    pub centroid: Point,
    pub bbox: Rect,
}

/// Maximal connected regions of a binary image, filtered by minimum area,
/// in deterministic (min_y, then min_x) order.
pub fn connected_components(
    binary: &GrayImage,
    connectivity: Connectivity,
    min_area: usize,
) -> Vec<Component> {
    let (w, h) = (binary.width() as i64, binary.height() as i64);
    let mut visited = vec![false; (w * h) as usize];
    let mut components = Vec::new();
    let offsets: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Connectivity::Eight => &[
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ],
    };
    let mut stack = Vec::new();
    for start_y in 0..h {
        for start_x in 0..w {
            let idx = (start_y * w + start_x) as usize;
            if visited[idx] || binary.get(start_x as u32, start_y as u32) <= 0.5 {
                continue;
            }
            visited[idx] = true;
            stack.push((start_x, start_y));
            let mut count = 0usize;
            let (mut sum_x, mut sum_y) = (0.0f64, 0.0f64);
            let (mut min_x, mut min_y, mut max_x, mut max_y) = (start_x, start_y, start_x, start_y);
            while let Some((x, y)) = stack.pop() {
                count += 1;
                sum_x += x as f64;
                sum_y += y as f64;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
                for &(dx, dy) in offsets {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let nidx = (ny * w + nx) as usize;
                    if !visited[nidx] && binary.get(nx as u32, ny as u32) > 0.5 {
                        visited[nidx] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            if count >= min_area {
                components.push(Component {
                    pixel_count: count,
                    centroid: Point::new(sum_x / count as f64, sum_y / count as f64),
                    bbox: Rect {
                        min_x: min_x as u32,
                        min_y: min_y as u32,
                        max_x: max_x as u32,
                        max_y: max_y as u32,
                    },
                });
            }
        }
    }
    components.sort_by_key(|c| (c.bbox.min_y, c.bbox.min_x, c.bbox.max_y, c.bbox.max_x));
    components
}

/// Chebyshev (box) dilation of a binary image by `radius` pixels, separable.
pub fn dilate(binary: &GrayImage, radius: u32) -> GrayImage {
    if radius == 0 {
        return binary.clone();
    }
    let (w, h) = (binary.width(), binary.height());
    let r = radius as i64;
    let mut horizontal = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let lo = (x as i64 - r).max(0) as u32;
            let hi = ((x as i64 + r) as u32).min(w - 1);
            let mut v = 0.0;
            for xx in lo..=hi {
                if binary.get(xx, y) > 0.5 {
                    v = 1.0;
                    break;
                }
            }
            horizontal.set(x, y, v);
        }
    }
    let mut out = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let lo = (y as i64 - r).max(0) as u32;
            let hi = ((y as i64 + r) as u32).min(h - 1);
            let mut v = 0.0;
            for yy in lo..=hi {
                if horizontal.get(x, yy) > 0.5 {
                    v = 1.0;
                    break;
                }
            }
            out.set(x, y, v);
        }
    }
    out
}

/// Interpretation parameters. Defaults are the heuristics that work well on
/// the synthesized dataset: mask width 1.8, initial threshold 0.35, update
/// rate 0.05, ten feedback iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterpParams {
    /// Plausibility mask width in pixels.
    pub beta: f64,
    /// Initial per-pair threshold.
    pub tau0: f64,
    /// Multiplicative update rate.
    pub lambda: f64,
    /// Feedback iterations.
    pub n_iters: u32,
    /// Channel binarization threshold for vertices and blob diffing.
    pub binarize_threshold: f32,
    /// Minimum component area in pixels.
    pub min_blob_area: usize,
    /// Dilation tolerance when diffing rendered strokes against the input.
    pub dilate_px: u32,
    /// Stroke width used when rendering edge proposals back to ink.
    pub render_width: f64,
    /// Optional pair-distance cutoff; None scores all pairs.
    pub max_edge_length: Option<f64>,
}

impl Default for InterpParams {
    fn default() -> Self {
        InterpParams {
            beta: 1.8,
            tau0: 0.35,
            lambda: 0.05,
            n_iters: 10,
            binarize_threshold: 0.5,
            min_blob_area: 4,
            dilate_px: 2,
            render_width: 2.0,
            max_edge_length: None,
        }
    }
}

impl InterpParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::InvalidInput("beta must be positive".into()));
        }
        if !(self.tau0 > 0.0 && self.tau0 < 1.0) {
            // negated form also rejects NaN
            return Err(Error::InvalidInput("tau0 must be in (0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::InvalidInput("lambda must be in [0, 1)".into()));
        }
        if self.render_width.is_nan() || self.render_width <= 0.0 {
            return Err(Error::InvalidInput("render_width must be positive".into()));
        }
        Ok(())
    }
}

/// Vertices: centroids of corners-channel components, in deterministic order.
pub fn vertices_from_masks(probs: &ProbabilityMap, params: &InterpParams) -> Vec<Point> {
    let corners = probs.channel(CLASS_CORNERS as usize);
    let binary = corners.binarize(params.binarize_threshold);
    connected_components(&binary, Connectivity::Eight, params.min_blob_area)
        .into_iter()
        .map(|c| c.centroid)
        .collect()
}

/// Mask statistics between two points: pixel centers within perpendicular
/// distance beta/2 of the segment and within its axial extent, clipped to
/// the canvas. Returns (mask size, mask sum, kept size, kept sum) where
/// "kept" drops pixels flagged in `excluded`.
fn mask_stats(
    lines: &GrayImage,
    p: Point,
    q: Point,
    beta: f64,
    excluded: Option<&[bool]>,
) -> (usize, f64, usize, f64) {
    // Canonical endpoint order makes the mask exactly symmetric in (p, q):
    // both orders run the identical float computation.
    let (p, q) = if (p.x, p.y) <= (q.x, q.y) { (p, q) } else { (q, p) };
    let len = p.distance(q);
    let half = beta / 2.0;
    let (w, h) = (lines.width(), lines.height());
    let min_x = (p.x.min(q.x) - half - 1.0).floor().max(0.0) as u32;
    let max_x = (p.x.max(q.x) + half + 1.0).ceil().min(w as f64 - 1.0) as u32;
    let min_y = (p.y.min(q.y) - half - 1.0).floor().max(0.0) as u32;
    let max_y = (p.y.max(q.y) + half + 1.0).ceil().min(h as f64 - 1.0) as u32;
    let ux = (q.x - p.x) / len;
    let uy = (q.y - p.y) / len;
    let (mut m_count, mut m_sum, mut kept_count, mut kept_sum) = (0usize, 0.0f64, 0usize, 0.0f64);
    for y in min_y..=max_y {
        for x in min_x..=max_x {
            let dx = x as f64 - p.x;
            let dy = y as f64 - p.y;
            let along = dx * ux + dy * uy;
            if along < 0.0 || along > len {
                continue;
            }
            let perp = (dx * uy - dy * ux).abs();
            if perp > half {
                continue;
            }
            let v = lines.get(x, y) as f64;
            m_count += 1;
            m_sum += v;
            let is_excluded = excluded
                .map(|e| e[(y * w + x) as usize])
                .unwrap_or(false);
            if !is_excluded {
                kept_count += 1;
                kept_sum += v;
            }
        }
    }
    (m_count, m_sum, kept_count, kept_sum)
}

/// Plausibility of an edge between p and q: mean lines-channel value over
/// the rectangular mask of width `beta` centred on the segment. An empty
/// mask scores zero.
pub fn plausibility(lines: &GrayImage, p: Point, q: Point, beta: f64) -> Result<f64> {
    if p == q {
        return Err(Error::DegeneratePair);
    }
    let (m_count, m_sum, _, _) = mask_stats(lines, p, q, beta, None);
    if m_count == 0 {
        return Ok(0.0);
    }
    Ok(m_sum / m_count as f64)
}

/// Flat upper-triangle table of per-pair values for n vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    n: usize,
    values: Vec<f64>,
}

impl PairTable {
    pub fn new(n: usize, init: f64) -> Self {
        PairTable {
            n,
            values: vec![init; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn len_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i.min(j), i.max(j))]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = self.index(i.min(j), i.max(j));
        self.values[idx] = value;
    }

    /// All (i, j) pairs with i < j, in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j)))
    }
}

/// Per-pair thresholds, stored lazily against a shared default.
#[derive(Debug, Clone, PartialEq)]
pub struct TauMap {
    default: f64,
    overrides: BTreeMap<(usize, usize), f64>,
}

impl TauMap {
    pub fn new(tau0: f64) -> Self {
        TauMap {
            default: tau0,
            overrides: BTreeMap::new(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        *self.overrides.get(&key).unwrap_or(&self.default)
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.overrides.insert((i.min(j), i.max(j)), value);
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn overrides(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.overrides
    }
}

/// Pair scorer: the plausibility score refined by corners-channel exclusion
/// and the through-vertex rule described in the module docs.
pub struct PairScorer<'a> {
    lines: &'a GrayImage,
    excluded: Option<Vec<bool>>,
    vertices: &'a [Point],
    beta: f64,
    max_edge_length: Option<f64>,
}

impl<'a> PairScorer<'a> {
    pub fn new(
        lines: &'a GrayImage,
        corners: Option<&GrayImage>,
        vertices: &'a [Point],
        params: &InterpParams,
    ) -> Self {
        let excluded = corners.map(|c| {
            c.pixels()
                .iter()
                .map(|&v| v > params.binarize_threshold)
                .collect()
        });
        PairScorer {
            lines,
            excluded,
            vertices,
            beta: params.beta,
            max_edge_length: params.max_edge_length,
        }
    }

    /// True when a third vertex sits inside the scoring band strictly
    /// between the endpoints. The band extends 2.5 px beyond the mask
    /// half-width: stroke ink is about a pixel wide on each side of its
    /// polyline and joint centroids sit up to 1.5 px inside the wedge, so a
    /// vertex that far from the chord still means the chord runs through
    /// drawn-and-split geometry.
    fn blocked_by_vertex(&self, i: usize, j: usize) -> bool {
        let p = self.vertices[i];
        let q = self.vertices[j];
        let len = p.distance(q);
        let ux = (q.x - p.x) / len;
        let uy = (q.y - p.y) / len;
        let band = self.beta / 2.0 + 2.5;
        for (k, &v) in self.vertices.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let dx = v.x - p.x;
            let dy = v.y - p.y;
            let along = dx * ux + dy * uy;
            if along <= 3.0 || along >= len - 3.0 {
                continue;
            }
            if (dx * uy - dy * ux).abs() <= band {
                return true;
            }
        }
        false
    }

    /// Score one pair. Pairs beyond `max_edge_length` score negative
    /// infinity (never proposed); pairs blocked by an interior vertex score
    /// zero; otherwise the corners-excluded mask mean, falling back to the
    /// full mask when the exclusion leaves nothing.
    pub fn score(&self, i: usize, j: usize) -> f64 {
        let p = self.vertices[i];
        let q = self.vertices[j];
        if p.distance(q) < 1e-9 {
            return 0.0;
        }
        if let Some(limit) = self.max_edge_length {
            if p.distance(q) > limit {
                return f64::NEG_INFINITY;
            }
        }
        if self.blocked_by_vertex(i, j) {
            return 0.0;
        }
        let (m_count, m_sum, kept_count, kept_sum) =
            mask_stats(self.lines, p, q, self.beta, self.excluded.as_deref());
        if kept_count > 0 {
            kept_sum / kept_count as f64
        } else if m_count > 0 {
            m_sum / m_count as f64
        } else {
            0.0
        }
    }

    /// Score every unordered pair once.
    pub fn score_all(&self) -> PairTable {
        let mut table = PairTable::new(self.vertices.len(), 0.0);
        for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                let s = self.score(i, j);
                table.set(i, j, s);
            }
        }
        table
    }
}

/// Threshold the cached pair scores: edges are pairs with score > tau.
pub fn propose_edges(scores: &PairTable, tau: &TauMap) -> BTreeSet<(usize, usize)> {
    scores
        .pairs()
        .filter(|&(i, j)| scores.get(i, j) > tau.get(i, j))
        .collect()
}

/// An interpreted stroke graph with its threshold and score state.
#[derive(Debug, Clone)]
pub struct StrokeGraph {
    pub vertices: Vec<Point>,
    pub edges: BTreeSet<(usize, usize)>,
    pub tau: TauMap,
    pub eta: PairTable,
}

impl StrokeGraph {
    pub fn empty(tau0: f64) -> Self {
        StrokeGraph {
            vertices: Vec::new(),
            edges: BTreeSet::new(),
            tau: TauMap::new(tau0),
            eta: PairTable::new(0, 0.0),
        }
    }
}

/// Render graph edges as straight binary strokes, with the same segment
/// renderer used for dataset synthesis.
pub fn render_graph(graph: &StrokeGraph, canvas: u32, stroke_width: f64) -> GrayImage {
    let mut img = GrayImage::new(canvas, canvas);
    for &(i, j) in &graph.edges {
        draw_segment(&mut img, graph.vertices[i], graph.vertices[j], stroke_width);
    }
    img
}

/// Regions of the input missing from the rendering (absent) and regions of
/// the rendering missing from the input (superfluous), both after dilating
/// the opposite side by `dilate_px` to absorb rounding differences.
pub fn blob_diff(
    input: &GrayImage,
    rendered: &GrayImage,
    params: &InterpParams,
) -> Result<(Vec<Component>, Vec<Component>)> {
    if !input.same_shape(rendered) {
        return Err(Error::ShapeMismatch(format!(
            "input {}x{} vs rendered {}x{}",
            input.width(),
            input.height(),
            rendered.width(),
            rendered.height()
        )));
    }
    let bin_input = input.binarize(params.binarize_threshold);
    let bin_rendered = rendered.binarize(params.binarize_threshold);
    let grown_rendered = dilate(&bin_rendered, params.dilate_px);
    let grown_input = dilate(&bin_input, params.dilate_px);
    let (w, h) = (input.width(), input.height());
    let mut absent_img = GrayImage::new(w, h);
    let mut superfluous_img = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if bin_input.get(x, y) > 0.5 && grown_rendered.get(x, y) <= 0.5 {
                absent_img.set(x, y, 1.0);
            }
            if bin_rendered.get(x, y) > 0.5 && grown_input.get(x, y) <= 0.5 {
                superfluous_img.set(x, y, 1.0);
            }
        }
    }
    let absent = connected_components(&absent_img, Connectivity::Eight, params.min_blob_area);
    let superfluous =
        connected_components(&superfluous_img, Connectivity::Eight, params.min_blob_area);
    Ok((absent, superfluous))
}

/// Bounding-box padding for blob containment tests. The diff erodes blobs
/// by the dilation tolerance plus the rendered stroke half-width around
/// already-drawn geometry, and vertex centroids sit up to a pixel inside
/// joints, so the pad must cover all three on top of the mask width —
/// otherwise threshold decay stalls for edges at partially-drawn joints.
pub fn blob_pad(params: &InterpParams) -> f64 {
    params.beta + params.dilate_px as f64 + params.render_width
}

/// One multiplicative threshold update. A pair whose endpoints both fall in
/// some absent-blob bbox (padded by `pad`) decays; both in a superfluous
/// bbox grows; absent wins when both match.
pub fn update_thresholds(
    tau: &mut TauMap,
    vertices: &[Point],
    absent: &[Component],
    superfluous: &[Component],
    lambda: f64,
    pad: f64,
) {
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            let p = vertices[i];
            let q = vertices[j];
            let in_boxes = |blobs: &[Component]| {
                blobs
                    .iter()
                    .any(|b| b.bbox.contains_padded(p, pad) && b.bbox.contains_padded(q, pad))
            };
            let delta = if in_boxes(absent) {
                -1.0
            } else if in_boxes(superfluous) {
                1.0
            } else {
                continue;
            };
            let updated = tau.get(i, j) * (1.0 + lambda * delta);
            tau.set(i, j, updated);
        }
    }
}

/// Per-iteration feedback statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    pub edges: usize,
    pub absent: usize,
    pub superfluous: usize,
    pub tau_min: f64,
    pub tau_max: f64,
}

/// Diagnostics from a full interpretation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InterpretDiagnostics {
    pub vertex_count: usize,
    pub iterations: Vec<IterationStats>,
    pub warnings: Vec<String>,
}

/// Full interpretation loop: detect vertices, score all pairs once, then
/// iterate propose -> render -> diff -> update, and propose once more with
/// the final thresholds.
pub fn interpret(
    input: &GrayImage,
    probs: &ProbabilityMap,
    params: &InterpParams,
) -> Result<(StrokeGraph, InterpretDiagnostics)> {
    params.validate()?;
    if probs.width() != input.width() || probs.height() != input.height() {
        return Err(Error::ShapeMismatch(format!(
            "input {}x{} vs probability map {}x{}",
            input.width(),
            input.height(),
            probs.width(),
            probs.height()
        )));
    }
    let mut diagnostics = InterpretDiagnostics::default();
    let vertices = vertices_from_masks(probs, params);
    diagnostics.vertex_count = vertices.len();
    if vertices.len() < 2 {
        diagnostics
            .warnings
            .push(format!("only {} vertices detected; empty graph", vertices.len()));
        let mut graph = StrokeGraph::empty(params.tau0);
        graph.vertices = vertices;
        return Ok((graph, diagnostics));
    }

    let lines = probs.channel(CLASS_LINES as usize);
    let corners = probs.channel(CLASS_CORNERS as usize);
    let scorer = PairScorer::new(&lines, Some(&corners), &vertices, params);
    let eta = scorer.score_all();
    let mut tau = TauMap::new(params.tau0);
    let canvas = input.width();

    for _ in 0..params.n_iters {
        let edges = propose_edges(&eta, &tau);
        let graph = StrokeGraph {
            vertices: vertices.clone(),
            edges,
            tau: tau.clone(),
            eta: eta.clone(),
        };
        let rendered = render_graph(&graph, canvas, params.render_width);
        let (absent, superfluous) = blob_diff(input, &rendered, params)?;
        update_thresholds(
            &mut tau,
            &vertices,
            &absent,
            &superfluous,
            params.lambda,
            blob_pad(params),
        );
        let (tau_min, tau_max) = tau_range(&tau, vertices.len());
        diagnostics.iterations.push(IterationStats {
            edges: graph.edges.len(),
            absent: absent.len(),
            superfluous: superfluous.len(),
            tau_min,
            tau_max,
        });
    }

    let edges = propose_edges(&eta, &tau);
    Ok((
        StrokeGraph {
            vertices,
            edges,
            tau,
            eta,
        },
        diagnostics,
    ))
}

fn tau_range(tau: &TauMap, n: usize) -> (f64, f64) {
    let mut min = tau.default_value();
    let mut max = tau.default_value();
    if n < 2 {
        return (min, max);
    }
    for (&_, &v) in tau.overrides() {
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{labels_to_probmap, make_labels, rasterize};
    use crate::sketch::{Polyline, Sketch};

    fn gray(w: u32, h: u32, ink: &[(u32, u32)]) -> GrayImage {
        let mut img = GrayImage::new(w, h);
        for &(x, y) in ink {
            img.set(x, y, 1.0);
        }
        img
    }

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
    fn components_of_blank_image() {
        let img = GrayImage::new(8, 8);
        assert!(connected_components(&img, Connectivity::Eight, 1).is_empty());
    }

    #[test]
    fn components_two_blocks() {
        let img = gray(
            16,
            16,
            &[(0, 0), (1, 0), (0, 1), (1, 1), (10, 10), (11, 10), (10, 11), (11, 11)],
        );
        let comps = connected_components(&img, Connectivity::Eight, 1);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].centroid, Point::new(0.5, 0.5));
        assert_eq!(comps[1].centroid, Point::new(10.5, 10.5));
        assert_eq!(comps[0].pixel_count, 4);
    }

    #[test]
    fn components_diagonal_connectivity() {
        let chain: Vec<(u32, u32)> = (0..5).map(|i| (i, i)).collect();
        let img = gray(8, 8, &chain);
        assert_eq!(connected_components(&img, Connectivity::Eight, 1).len(), 1);
        assert_eq!(connected_components(&img, Connectivity::Four, 1).len(), 5);
    }

    #[test]
    fn components_min_area_filter() {
        let img = gray(8, 8, &[(0, 0), (4, 4), (4, 5), (4, 6), (5, 4), (5, 5), (5, 6)]);
        let comps = connected_components(&img, Connectivity::Eight, 4);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].pixel_count, 6);
    }

    #[test]
    fn vertices_from_single_stroke_oracle() {
        let sketch = sketch_on_canvas(64, &[&[(8.0, 32.0), (56.0, 32.0)]]);
        let (_, labels) = make_labels(&sketch, 2.0, 3.0).unwrap();
        let probs = labels_to_probmap(&labels);
        let vertices = vertices_from_masks(&probs, &InterpParams::default());
        assert_eq!(vertices.len(), 2);
        // Centroids of endpoint blobs sit a little inside the stroke run;
        // measured pull stays under 1.5 px with the default geometry.
        let ends = [Point::new(8.0, 32.0), Point::new(56.0, 32.0)];
        for v in &vertices {
            assert!(ends.iter().any(|e| e.distance(*v) <= 1.5), "vertex {v:?}");
        }
    }

    #[test]
    fn vertices_from_blank_probmap() {
        let labels = crate::raster::LabelImage::new(32, 32);
        let probs = labels_to_probmap(&labels);
        assert!(vertices_from_masks(&probs, &InterpParams::default()).is_empty());
    }

    #[test]
    fn vertices_from_x_cross_oracle() {
        let sketch = sketch_on_canvas(
            128,
            &[&[(10.0, 10.0), (118.0, 118.0)], &[(10.0, 118.0), (118.0, 10.0)]],
        );
        let (_, labels) = make_labels(&sketch, 2.0, 3.0).unwrap();
        let probs = labels_to_probmap(&labels);
        assert_eq!(vertices_from_masks(&probs, &InterpParams::default()).len(), 5);
    }

    #[test]
    fn plausibility_extremes() {
        let zeros = GrayImage::new(16, 16);
        let mut ones = GrayImage::new(16, 16);
        for y in 0..16 {
            for x in 0..16 {
                ones.set(x, y, 1.0);
            }
        }
        let p = Point::new(2.0, 8.0);
        let q = Point::new(13.0, 8.0);
        assert_eq!(plausibility(&zeros, p, q, 1.8).unwrap(), 0.0);
        assert_eq!(plausibility(&ones, p, q, 1.8).unwrap(), 1.0);
    }

    #[test]
    fn plausibility_degenerate_pair() {
        let img = GrayImage::new(8, 8);
        let p = Point::new(2.0, 2.0);
        assert!(matches!(
            plausibility(&img, p, p, 1.8),
            Err(Error::DegeneratePair)
        ));
    }

    /// Brute-force mask size: every canvas pixel checked against the two
    /// geometric conditions, independently of the implementation's scan.
    fn brute_force_mask(w: u32, h: u32, p: Point, q: Point, beta: f64) -> Vec<(u32, u32)> {
        let len = p.distance(q);
        let ux = (q.x - p.x) / len;
        let uy = (q.y - p.y) / len;
        let mut pixels = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let dx = x as f64 - p.x;
                let dy = y as f64 - p.y;
                let along = dx * ux + dy * uy;
                let perp = (dx * uy - dy * ux).abs();
                if along >= 0.0 && along <= len && perp <= beta / 2.0 {
                    pixels.push((x, y));
                }
            }
        }
        pixels
    }

    #[test]
    fn plausibility_counts_mask_pixels() {
        let p = Point::new(2.0, 5.0);
        let q = Point::new(12.0, 5.0);
        // Ink exactly along the mask row.
        let run: Vec<(u32, u32)> = (2..=12).map(|x| (x, 5)).collect();
        let img = gray(20, 20, &run);
        assert_eq!(plausibility(&img, p, q, 1.8).unwrap(), 1.0);

        // One ink pixel inside the mask on an otherwise blank image.
        let mask = brute_force_mask(20, 20, p, q, 1.8);
        assert!(mask.contains(&(7, 5)));
        let img = gray(20, 20, &[(7, 5)]);
        let eta = plausibility(&img, p, q, 1.8).unwrap();
        assert!((eta - 1.0 / mask.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn plausibility_symmetric_in_endpoints() {
        let img = gray(20, 20, &[(5, 5), (9, 6), (12, 4)]);
        let p = Point::new(3.0, 5.0);
        let q = Point::new(14.0, 5.5);
        let a = plausibility(&img, p, q, 2.5).unwrap();
        let b = plausibility(&img, q, p, 2.5).unwrap();
        assert_eq!(a, b);
    }

    fn triangle_fixture() -> (GrayImage, ProbabilityMap, Vec<Point>) {
        let sketch = sketch_on_canvas(
            128,
            &[
                &[(20.0, 100.0), (108.0, 100.0)],
                &[(108.0, 100.0), (64.0, 20.0)],
                &[(64.0, 20.0), (20.0, 100.0)],
            ],
        );
        let (x, labels) = make_labels(&sketch, 2.0, 3.0).unwrap();
        let probs = labels_to_probmap(&labels);
        let truth = vec![
            Point::new(20.0, 100.0),
            Point::new(108.0, 100.0),
            Point::new(64.0, 20.0),
        ];
        (x, probs, truth)
    }

    #[test]
    fn propose_edges_threshold_extremes() {
        let (_, probs, _) = triangle_fixture();
        let params = InterpParams::default();
        let vertices = vertices_from_masks(&probs, &params);
        let lines = probs.channel(CLASS_LINES as usize);
        let corners = probs.channel(CLASS_CORNERS as usize);
        let scorer = PairScorer::new(&lines, Some(&corners), &vertices, &params);
        let scores = scorer.score_all();
        assert!(propose_edges(&scores, &TauMap::new(1.1)).is_empty());
        let complete = propose_edges(&scores, &TauMap::new(-1.0));
        assert_eq!(complete.len(), vertices.len() * (vertices.len() - 1) / 2);
    }

    #[test]
    fn propose_edges_triangle_oracle() {
        let (_, probs, truth) = triangle_fixture();
        let params = InterpParams::default();
        let vertices = vertices_from_masks(&probs, &params);
        assert_eq!(vertices.len(), 3);
        let lines = probs.channel(CLASS_LINES as usize);
        let corners = probs.channel(CLASS_CORNERS as usize);
        let scorer = PairScorer::new(&lines, Some(&corners), &vertices, &params);
        let edges = propose_edges(&scorer.score_all(), &TauMap::new(0.35));
        assert_eq!(edges.len(), 3);
        for v in &vertices {
            assert!(truth.iter().any(|t| t.distance(*v) <= 2.0));
        }
    }

    #[test]
    fn through_vertex_pairs_score_zero() {
        // Three collinear corners: the outer pair is covered by the two
        // adjacent edges and must not be proposed at any positive threshold.
        let sketch = sketch_on_canvas(
            96,
            &[&[(10.0, 48.0), (86.0, 48.0)], &[(48.0, 10.0), (48.0, 86.0)]],
        );
        let (_, labels) = make_labels(&sketch, 2.0, 3.0).unwrap();
        let probs = labels_to_probmap(&labels);
        let params = InterpParams::default();
        let vertices = vertices_from_masks(&probs, &params);
        assert_eq!(vertices.len(), 5);
        let lines = probs.channel(CLASS_LINES as usize);
        let corners = probs.channel(CLASS_CORNERS as usize);
        let scorer = PairScorer::new(&lines, Some(&corners), &vertices, &params);
        let edges = propose_edges(&scorer.score_all(), &TauMap::new(0.35));
        assert_eq!(edges.len(), 4, "only center-to-end edges survive");
    }

    #[test]
    fn render_empty_graph_is_blank() {
        let graph = StrokeGraph::empty(0.35);
        let img = render_graph(&graph, 32, 2.0);
        assert_eq!(img.ink_count(), 0);
    }

    #[test]
    fn render_single_edge_matches_rasterize() {
        let a = Point::new(5.0, 5.0);
        let b = Point::new(27.0, 20.0);
        let graph = StrokeGraph {
            vertices: vec![a, b],
            edges: [(0usize, 1usize)].into_iter().collect(),
            tau: TauMap::new(0.35),
            eta: PairTable::new(2, 0.0),
        };
        let rendered = render_graph(&graph, 32, 2.0);
        let sketch = sketch_on_canvas(32, &[&[(5.0, 5.0), (27.0, 20.0)]]);
        let direct = rasterize(&sketch, 2.0).unwrap();
        assert_eq!(rendered, direct);
    }

    /// IoU with the pipeline's rounding tolerance: ink counts as matched
    /// when the other image has ink within `tol` pixels (vertex centroids
    /// sit up to a pixel inside stroke joints, shifting renders slightly).
    fn tolerant_iou(a: &GrayImage, b: &GrayImage, tol: u32) -> f64 {
        let grown_a = dilate(&a.binarize(0.5), tol);
        let grown_b = dilate(&b.binarize(0.5), tol);
        let mut inter = 0usize;
        let mut union = 0usize;
        for i in 0..a.pixels().len() {
            let ia = a.pixels()[i] > 0.5;
            let ib = b.pixels()[i] > 0.5;
            let matched = (ia && grown_b.pixels()[i] > 0.5) || (ib && grown_a.pixels()[i] > 0.5);
            if (ia || ib) && matched {
                inter += 1;
            }
            if ia || ib {
                union += 1;
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn render_triangle_graph_close_to_oracle() {
        let (x, probs, _) = triangle_fixture();
        let params = InterpParams::default();
        let (graph, _) = interpret(&x, &probs, &params).unwrap();
        let rendered = render_graph(&graph, 128, params.render_width);
        assert!(tolerant_iou(&rendered, &x, params.dilate_px) >= 0.95);
    }

    #[test]
    fn blob_diff_identical_images() {
        let (x, _, _) = triangle_fixture();
        let (absent, superfluous) = blob_diff(&x, &x, &InterpParams::default()).unwrap();
        assert!(absent.is_empty());
        assert!(superfluous.is_empty());
    }

    #[test]
    fn blob_diff_blank_rendering() {
        let (x, _, _) = triangle_fixture();
        let blank = GrayImage::new(128, 128);
        let (absent, superfluous) = blob_diff(&x, &blank, &InterpParams::default()).unwrap();
        let direct = connected_components(&x.binarize(0.5), Connectivity::Eight, 4);
        assert_eq!(absent.len(), direct.len());
        assert!(superfluous.is_empty());
    }

    #[test]
    fn blob_diff_missing_square_side() {
        let full = sketch_on_canvas(
            64,
            &[&[(10.0, 10.0), (54.0, 10.0), (54.0, 54.0), (10.0, 54.0), (10.0, 10.0)]],
        );
        let partial = sketch_on_canvas(
            64,
            &[&[(54.0, 10.0), (54.0, 54.0), (10.0, 54.0), (10.0, 10.0)]],
        );
        let input = rasterize(&full, 2.0).unwrap();
        let rendered = rasterize(&partial, 2.0).unwrap();
        let (absent, superfluous) = blob_diff(&input, &rendered, &InterpParams::default()).unwrap();
        assert_eq!(absent.len(), 1);
        assert!(superfluous.is_empty());
        // The absent blob lies along the missing top side.
        let b = absent[0].bbox;
        assert!(b.min_y <= 12 && b.max_y <= 14, "bbox {b:?}");
        assert!(b.max_x - b.min_x > 30, "bbox {b:?}");
    }

    #[test]
    fn blob_diff_shape_mismatch() {
        let a = GrayImage::new(8, 8);
        let b = GrayImage::new(9, 8);
        assert!(matches!(
            blob_diff(&a, &b, &InterpParams::default()),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn threshold_update_single_step() {
        let vertices = vec![Point::new(2.0, 2.0), Point::new(10.0, 2.0)];
        let mut tau = TauMap::new(0.35);
        let blob = Component {
            pixel_count: 100,
            centroid: Point::new(6.0, 2.0),
            bbox: Rect {
                min_x: 0,
                min_y: 0,
                max_x: 12,
                max_y: 4,
            },
        };
        update_thresholds(&mut tau, &vertices, std::slice::from_ref(&blob), &[], 0.05, 1.8);
        assert!((tau.get(0, 1) - 0.3325).abs() < 1e-12);

        // Absent wins over superfluous when both match.
        let mut tau = TauMap::new(0.35);
        update_thresholds(
            &mut tau,
            &vertices,
            std::slice::from_ref(&blob),
            std::slice::from_ref(&blob),
            0.05,
            1.8,
        );
        assert!((tau.get(0, 1) - 0.3325).abs() < 1e-12);

        // No matching blob: unchanged.
        let mut tau = TauMap::new(0.35);
        update_thresholds(&mut tau, &vertices, &[], &[], 0.05, 1.8);
        assert_eq!(tau.get(0, 1), 0.35);
    }

    #[test]
    fn threshold_update_compounds_geometrically() {
        let vertices = vec![Point::new(2.0, 2.0), Point::new(10.0, 2.0)];
        let blob = Component {
            pixel_count: 100,
            centroid: Point::new(6.0, 2.0),
            bbox: Rect {
                min_x: 0,
                min_y: 0,
                max_x: 12,
                max_y: 4,
            },
        };
        let mut tau = TauMap::new(0.35);
        for _ in 0..10 {
            update_thresholds(&mut tau, &vertices, &[], std::slice::from_ref(&blob), 0.05, 1.8);
        }
        assert!((tau.get(0, 1) - 0.35 * 1.05f64.powi(10)).abs() < 1e-12);
        assert!((tau.get(0, 1) - 0.570113).abs() < 1e-6);
    }

    #[test]
    fn interpret_blank_inputs() {
        let x = GrayImage::new(64, 64);
        let labels = crate::raster::LabelImage::new(64, 64);
        let probs = labels_to_probmap(&labels);
        let (graph, diag) = interpret(&x, &probs, &InterpParams::default()).unwrap();
        assert!(graph.vertices.is_empty());
        assert!(graph.edges.is_empty());
        assert_eq!(diag.warnings.len(), 1);
    }

    #[test]
    fn interpret_triangle_stable_across_iterations() {
        let (x, probs, _) = triangle_fixture();
        let (graph, diag) = interpret(&x, &probs, &InterpParams::default()).unwrap();
        assert_eq!(graph.vertices.len(), 3);
        assert_eq!(graph.edges.len(), 3);
        for it in &diag.iterations {
            assert_eq!(it.edges, 3);
            assert_eq!(it.absent, 0);
            assert_eq!(it.superfluous, 0);
        }
    }

    #[test]
    fn interpret_recovers_missed_edges_with_feedback() {
        // Weak lines response (attenuated oracle) with a raised initial
        // threshold: the naive proposal misses everything, the feedback loop
        // recovers it within ten updates.
        let (x, mut probs, _) = triangle_fixture();
        probs.attenuate_channel(CLASS_LINES as usize, 0.6);
        let params = InterpParams {
            tau0: 0.6,
            ..InterpParams::default()
        };
        let (graph, diag) = interpret(&x, &probs, &params).unwrap();
        assert!(diag.iterations[0].edges < 3, "premise: edges initially missed");
        assert_eq!(graph.edges.len(), 3, "missing edges recovered");
    }

    #[test]
    fn interpret_shape_mismatch() {
        let x = GrayImage::new(64, 64);
        let labels = crate::raster::LabelImage::new(32, 32);
        let probs = labels_to_probmap(&labels);
        assert!(matches!(
            interpret(&x, &probs, &InterpParams::default()),
            Err(Error::ShapeMismatch(_))
        ));
    }

}
