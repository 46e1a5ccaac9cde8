//! Threshold-separation study and fixed-threshold preset sweep.
//!
//! For each image the pair scores are sorted descending and truncated at the
//! known true-edge count E; the approximate threshold tau-hat is the mean of
//! the scores at ranks E-1..E+1 (window clipped at the ends). Collecting
//! tau-hat and its distance from the mean score across a dataset, per mask
//! width, shows whether edge pairs separate cleanly from non-edge pairs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::eval::ProbabilityMap;
use crate::graph::{
    interpret, propose_edges, vertices_from_masks, InterpParams, PairScorer, TauMap,
};
use crate::raster::{GrayImage, CLASS_CORNERS, CLASS_LINES};
use crate::sketch::Point;

/// One dataset image plus its ground truth, ready for studies.
#[derive(Debug, Clone)]
pub struct StudySample {
    pub input: GrayImage,
    pub probs: ProbabilityMap,
    pub truth_vertices: Vec<Point>,
    pub truth_edges: BTreeSet<(usize, usize)>,
}

/// Study configuration.
#[derive(Debug, Clone)]
pub struct StudyParams {
    pub betas: Vec<f64>,
    /// Rank-window size for tau-hat smoothing.
    pub smoothing_k: usize,
    /// Non-edge pairs sampled per image for the separation check.
    pub nonedge_samples: usize,
    pub histogram_bins: usize,
    pub seed: u64,
    /// Vertex matching tolerance between detected and true vertices, px.
    pub match_tolerance: f64,
    pub interp: InterpParams,
}

impl Default for StudyParams {
    fn default() -> Self {
        StudyParams {
            betas: vec![3.0, 5.0, 7.0],
            smoothing_k: 3,
            nonedge_samples: 50,
            histogram_bins: 12,
            seed: 7,
            match_tolerance: 2.0,
            interp: InterpParams::default(),
        }
    }
}

/// Greedy nearest-vertex matching: for each truth vertex, the closest
/// unclaimed detected vertex within tolerance.
pub fn match_vertices(truth: &[Point], detected: &[Point], tolerance: f64) -> Vec<Option<usize>> {
    let mut taken = vec![false; detected.len()];
    truth
        .iter()
        .map(|t| {
            let mut best: Option<(usize, f64)> = None;
            for (i, d) in detected.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let dist = t.distance(*d);
                if dist <= tolerance && best.map(|(_, b)| dist < b).unwrap_or(true) {
                    best = Some((i, dist));
                }
            }
            best.map(|(i, _)| {
                taken[i] = true;
                i
            })
        })
        .collect()
}

/// Truth edges mapped into detected-vertex index space, plus the number of
/// truth edges whose endpoints could not be matched.
pub fn map_truth_edges(
    truth_vertices: &[Point],
    truth_edges: &BTreeSet<(usize, usize)>,
    detected: &[Point],
    tolerance: f64,
) -> (BTreeSet<(usize, usize)>, usize) {
    let matching = match_vertices(truth_vertices, detected, tolerance);
    let mut mapped = BTreeSet::new();
    let mut unmatched = 0usize;
    for &(a, b) in truth_edges {
        match (matching[a], matching[b]) {
            (Some(i), Some(j)) if i != j => {
                mapped.insert((i.min(j), i.max(j)));
            }
            _ => unmatched += 1,
        }
    }
    (mapped, unmatched)
}

/// Edge-set comparison counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl EdgeMetrics {
    /// Compare a proposal against mapped truth; `extra_misses` counts truth
    /// edges that never made it into detected-vertex space.
    pub fn compare(
        proposed: &BTreeSet<(usize, usize)>,
        mapped_truth: &BTreeSet<(usize, usize)>,
        extra_misses: usize,
    ) -> EdgeMetrics {
        let tp = proposed.intersection(mapped_truth).count();
        EdgeMetrics {
            true_positives: tp,
            false_positives: proposed.len() - tp,
            false_negatives: mapped_truth.len() - tp + extra_misses,
        }
    }

    pub fn precision(&self) -> f64 {
        if self.true_positives + self.false_positives == 0 {
            1.0
        } else {
            self.true_positives as f64 / (self.true_positives + self.false_positives) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.true_positives + self.false_negatives == 0 {
            1.0
        } else {
            self.true_positives as f64 / (self.true_positives + self.false_negatives) as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accumulate(&mut self, other: &EdgeMetrics) {
        self.true_positives += other.true_positives;
        self.false_positives += other.false_positives;
        self.false_negatives += other.false_negatives;
    }

    pub fn zero() -> EdgeMetrics {
        EdgeMetrics {
            true_positives: 0,
            false_positives: 0,
            false_negatives: 0,
        }
    }
}

/// Fixed-range histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    pub fn record(&mut self, value: f64) {
        let bins = self.counts.len();
        let t = ((value - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        let bin = ((t * bins as f64) as usize).min(bins - 1);
        self.counts[bin] += 1;
    }

    /// Number of local maxima after smoothing the bin counts with a centered
    /// moving average of width `k`. Plateau runs count once.
    pub fn smoothed_peak_count(&self, k: usize) -> usize {
        let n = self.counts.len();
        if n == 0 {
            return 0;
        }
        let half = k / 2;
        let smoothed: Vec<f64> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half);
                let hi = (i + half).min(n - 1);
                let sum: usize = self.counts[lo..=hi].iter().sum();
                sum as f64 / (hi - lo + 1) as f64
            })
            .collect();
        let mut peaks = 0;
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && smoothed[j + 1] == smoothed[i] {
                j += 1;
            }
            let left_lower = i == 0 || smoothed[i - 1] < smoothed[i];
            let right_lower = j == n - 1 || smoothed[j + 1] < smoothed[i];
            if left_lower && right_lower && smoothed[i] > 0.0 {
                peaks += 1;
            }
            i = j + 1;
        }
        peaks
    }
}

/// Per-image study entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageStudy {
    pub tau_hat: f64,
    pub eta_bar: f64,
    pub margin: f64,
    pub min_true_eta: f64,
    pub max_nonedge_eta: f64,
    pub separated: bool,
    pub true_edges: usize,
    pub pairs: usize,
}

/// Study results for one mask width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaStudy {
    pub beta: f64,
    pub entries: Vec<ImageStudy>,
    pub skipped: usize,
    pub tau_hat_histogram: Histogram,
    pub margin_histogram: Histogram,
    pub separated_fraction: f64,
}

/// Run the separation study over samples for each mask width. Images with
/// fewer than two detected vertices or no mappable true edges are skipped
/// and counted.
pub fn threshold_study(samples: &[StudySample], params: &StudyParams) -> Vec<BetaStudy> {
    params
        .betas
        .iter()
        .map(|&beta| {
            let mut entries = Vec::new();
            let mut skipped = 0usize;
            let mut tau_hist = Histogram::new(0.0, 1.0, params.histogram_bins);
            let mut margin_hist = Histogram::new(-1.0, 1.0, 2 * params.histogram_bins);
            for (image_index, sample) in samples.iter().enumerate() {
                let interp = InterpParams {
                    beta,
                    ..params.interp.clone()
                };
                let vertices = vertices_from_masks(&sample.probs, &interp);
                if vertices.len() < 2 {
                    skipped += 1;
                    continue;
                }
                let (mapped_truth, _) = map_truth_edges(
                    &sample.truth_vertices,
                    &sample.truth_edges,
                    &vertices,
                    params.match_tolerance,
                );
                if mapped_truth.is_empty() {
                    skipped += 1;
                    continue;
                }
                let lines = sample.probs.channel(CLASS_LINES as usize);
                let corners = sample.probs.channel(CLASS_CORNERS as usize);
                let scorer = PairScorer::new(&lines, Some(&corners), &vertices, &interp);
                let scores = scorer.score_all();

                let mut sorted: Vec<f64> = scores.pairs().map(|(i, j)| scores.get(i, j)).collect();
                let pairs = sorted.len();
                sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
                // Rank window of size k centered at the truncation boundary
                // (ranks E-1..E+1 for k=3), clipped at the array ends.
                let truncate_at = sample.truth_edges.len().min(pairs);
                let radius = (params.smoothing_k.max(1) - 1) / 2;
                let window: BTreeSet<usize> = (truncate_at.saturating_sub(radius)
                    ..=truncate_at.saturating_add(radius))
                    .map(|r| r.min(pairs - 1))
                    .collect();
                let tau_hat =
                    window.iter().map(|&r| sorted[r]).sum::<f64>() / window.len() as f64;
                let eta_bar = sorted.iter().sum::<f64>() / pairs as f64;

                let min_true = mapped_truth
                    .iter()
                    .map(|&(i, j)| scores.get(i, j))
                    .fold(f64::INFINITY, f64::min);
                let nonedges: Vec<(usize, usize)> = scores
                    .pairs()
                    .filter(|p| !mapped_truth.contains(p))
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ (image_index as u64) << 20);
                let sampled: Vec<(usize, usize)> = if nonedges.len() <= params.nonedge_samples {
                    nonedges
                } else {
                    let mut pool = nonedges;
                    pool.shuffle(&mut rng);
                    pool.truncate(params.nonedge_samples);
                    pool
                };
                let max_nonedge = sampled
                    .iter()
                    .map(|&(i, j)| scores.get(i, j))
                    .fold(f64::NEG_INFINITY, f64::max);

                let entry = ImageStudy {
                    tau_hat,
                    eta_bar,
                    margin: tau_hat - eta_bar,
                    min_true_eta: min_true,
                    max_nonedge_eta: max_nonedge,
                    separated: min_true > max_nonedge,
                    true_edges: sample.truth_edges.len(),
                    pairs,
                };
                tau_hist.record(entry.tau_hat);
                margin_hist.record(entry.margin);
                entries.push(entry);
            }
            let separated = entries.iter().filter(|e| e.separated).count();
            let separated_fraction = if entries.is_empty() {
                0.0
            } else {
                separated as f64 / entries.len() as f64
            };
            BetaStudy {
                beta,
                entries,
                skipped,
                tau_hat_histogram: tau_hist,
                margin_histogram: margin_hist,
                separated_fraction,
            }
        })
        .collect()
}

/// One preset's aggregate reconstruction quality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetResult {
    pub beta: f64,
    pub tau: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
}

/// Fixed-threshold presets versus the adaptive feedback loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub presets: Vec<PresetResult>,
    pub adaptive: PresetResult,
    pub images: usize,
}

/// Evaluate the reference fixed (beta, tau) presets and the adaptive loop
/// on the same samples, reporting mean per-image edge precision/recall/F1.
pub fn preset_sweep(
    samples: &[StudySample],
    presets: &[(f64, f64)],
    params: &StudyParams,
) -> Result<SweepReport> {
    let mut preset_stats = vec![(0.0f64, 0.0f64, 0.0f64); presets.len()];
    let mut adaptive_stats = (0.0f64, 0.0f64, 0.0f64);
    let mut images = 0usize;

    for sample in samples {
        let vertices = vertices_from_masks(&sample.probs, &params.interp);
        if vertices.len() < 2 {
            continue;
        }
        let (mapped_truth, extra) = map_truth_edges(
            &sample.truth_vertices,
            &sample.truth_edges,
            &vertices,
            params.match_tolerance,
        );
        if mapped_truth.is_empty() {
            continue;
        }
        images += 1;
        let lines = sample.probs.channel(CLASS_LINES as usize);
        let corners = sample.probs.channel(CLASS_CORNERS as usize);
        for (slot, &(beta, tau)) in presets.iter().enumerate() {
            let interp = InterpParams {
                beta,
                ..params.interp.clone()
            };
            let scorer = PairScorer::new(&lines, Some(&corners), &vertices, &interp);
            let edges = propose_edges(&scorer.score_all(), &TauMap::new(tau));
            let metrics = EdgeMetrics::compare(&edges, &mapped_truth, extra);
            preset_stats[slot].0 += metrics.precision();
            preset_stats[slot].1 += metrics.recall();
            preset_stats[slot].2 += metrics.f1();
        }
        let (graph, _) = interpret(&sample.input, &sample.probs, &params.interp)?;
        let (mapped_adaptive, extra_adaptive) = map_truth_edges(
            &sample.truth_vertices,
            &sample.truth_edges,
            &graph.vertices,
            params.match_tolerance,
        );
        let metrics = EdgeMetrics::compare(&graph.edges, &mapped_adaptive, extra_adaptive);
        adaptive_stats.0 += metrics.precision();
        adaptive_stats.1 += metrics.recall();
        adaptive_stats.2 += metrics.f1();
    }

    let count = images.max(1) as f64;
    Ok(SweepReport {
        presets: presets
            .iter()
            .zip(&preset_stats)
            .map(|(&(beta, tau), &(p, r, f))| PresetResult {
                beta,
                tau,
                mean_precision: p / count,
                mean_recall: r / count,
                mean_f1: f / count,
            })
            .collect(),
        adaptive: PresetResult {
            beta: params.interp.beta,
            tau: params.interp.tau0,
            mean_precision: adaptive_stats.0 / count,
            mean_recall: adaptive_stats.1 / count,
            mean_f1: adaptive_stats.2 / count,
        },
        images,
    })
}

/// Build a study sample from a normalized sketch via the oracle labels.
pub fn oracle_sample(
    sketch: &crate::sketch::Sketch,
    stroke_width: f64,
    corner_radius: f64,
) -> Result<StudySample> {
    let (input, labels) = crate::raster::make_labels(sketch, stroke_width, corner_radius)?;
    let probs = crate::raster::labels_to_probmap(&labels);
    let (truth_vertices, truth_edges) = crate::dataset::ground_truth_graph(sketch, corner_radius);
    Ok(StudySample {
        input,
        probs,
        truth_vertices,
        truth_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, FixtureKind};
    use crate::sketch::normalize;

    fn samples(kinds: &[FixtureKind], seed: u64) -> Vec<StudySample> {
        kinds
            .iter()
            .enumerate()
            .map(|(i, &kind)| {
                let sketch = fixture(kind, seed + i as u64);
                let normalized = normalize(&sketch, 256, 2.0, 3.0).unwrap();
                oracle_sample(&normalized, 2.0, 3.0).unwrap()
            })
            .collect()
    }

    #[test]
    fn match_vertices_greedy_nearest() {
        let truth = vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)];
        let detected = vec![Point::new(9.5, 0.2), Point::new(0.5, 0.1)];
        let matching = match_vertices(&truth, &detected, 2.0);
        assert_eq!(matching, vec![Some(1), Some(0)]);
        let far = match_vertices(&truth, &[Point::new(50.0, 50.0)], 2.0);
        assert_eq!(far, vec![None, None]);
    }

    #[test]
    fn edge_metrics_counts() {
        let proposed: BTreeSet<(usize, usize)> = [(0, 1), (1, 2), (0, 3)].into_iter().collect();
        let truth: BTreeSet<(usize, usize)> = [(0, 1), (1, 2), (2, 3)].into_iter().collect();
        let m = EdgeMetrics::compare(&proposed, &truth, 1);
        assert_eq!(m.true_positives, 2);
        assert_eq!(m.false_positives, 1);
        assert_eq!(m.false_negatives, 2);
        assert!((m.precision() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn histogram_peaks() {
        let mut h = Histogram::new(0.0, 1.0, 10);
        for v in [0.35, 0.36, 0.38, 0.42, 0.44, 0.45, 0.41, 0.39] {
            h.record(v);
        }
        assert_eq!(h.smoothed_peak_count(3), 1);

        let mut two = Histogram::new(0.0, 1.0, 10);
        for v in [0.05, 0.06, 0.07, 0.08, 0.85, 0.86, 0.87] {
            two.record(v);
        }
        assert!(two.smoothed_peak_count(3) >= 2);
    }

    #[test]
    fn study_separates_idealized_image() {
        // Grid oracle: true edges score high, the many non-edges near zero,
        // so tau-hat falls strictly between the clusters and exceeds the
        // mean score over all pairs.
        let samples = samples(&[FixtureKind::GridHatch], 5);
        let params = StudyParams {
            betas: vec![1.8],
            ..StudyParams::default()
        };
        let studies = threshold_study(&samples, &params);
        assert_eq!(studies.len(), 1);
        assert_eq!(studies[0].entries.len(), 1);
        assert_eq!(studies[0].tau_hat_histogram.counts.iter().sum::<usize>(), 1);
        let entry = &studies[0].entries[0];
        assert!(entry.separated);
        assert!(entry.tau_hat > 0.0 && entry.tau_hat < 1.0);
        assert!(entry.margin > 0.0, "margin {}", entry.margin);
        assert!(entry.tau_hat > entry.max_nonedge_eta);
        assert!(entry.tau_hat < entry.min_true_eta + 1e-9);
    }

    #[test]
    fn study_emits_one_report_per_beta() {
        let samples = samples(&[FixtureKind::Square, FixtureKind::XCross], 11);
        let params = StudyParams::default();
        let studies = threshold_study(&samples, &params);
        assert_eq!(studies.len(), 3);
        for (study, beta) in studies.iter().zip([3.0, 5.0, 7.0]) {
            assert_eq!(study.beta, beta);
            assert_eq!(study.entries.len(), 2);
            assert_eq!(study.skipped, 0);
        }
    }

    #[test]
    fn study_skips_blank_images() {
        let blank = StudySample {
            input: GrayImage::new(64, 64),
            probs: crate::raster::labels_to_probmap(&crate::raster::LabelImage::new(64, 64)),
            truth_vertices: Vec::new(),
            truth_edges: BTreeSet::new(),
        };
        let params = StudyParams {
            betas: vec![3.0],
            ..StudyParams::default()
        };
        let studies = threshold_study(&[blank], &params);
        assert_eq!(studies[0].entries.len(), 0);
        assert_eq!(studies[0].skipped, 1);
    }

    #[test]
    fn preset_sweep_reports_all_presets() {
        let samples = samples(&[FixtureKind::Triangle, FixtureKind::Line], 3);
        let params = StudyParams::default();
        let report =
            preset_sweep(&samples, &crate::graph::FIXED_TAU_PRESETS, &params).unwrap();
        assert_eq!(report.presets.len(), 4);
        assert_eq!(report.images, 2);
        assert!(report.adaptive.mean_f1 > 0.9);
    }
}
