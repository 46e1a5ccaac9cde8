//! Segmentation evaluation math: per-pixel softmax, frequency-based class
//! weights, the weighted cross-entropy objective and its max-weight variant,
//! IoU accuracy, and the valid-convolution shape calculator for the
//! (k1 k2 d r) network family. All of it is pure arithmetic; no learning
//! framework is involved. Reductions run in fixed row-major order so results
//! are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GrayImage, LabelImage, NUM_CLASSES};

/// Probability clamp applied before logarithms so one-hot oracles stay finite.
pub const PROB_CLAMP: f64 = 1e-12;

/// K per-pixel class probabilities, stored plane-major ("khw" order).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    k: usize,
    width: u32,
    height: u32,
    probs: Vec<f32>,
}

impl ProbabilityMap {
    pub fn from_planes(k: usize, width: u32, height: u32, probs: Vec<f32>) -> Result<Self> {
        let n = k * (width as usize) * (height as usize);
        if probs.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{k}x{width}x{height} map needs {n} values, got {}",
                probs.len()
            )));
        }
        Ok(ProbabilityMap {
            k,
            width,
            height,
            probs,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn probs(&self) -> &[f32] {
        &self.probs
    }

    #[inline]
    fn plane_len(&self) -> usize {
        (self.width as usize) * (self.height as usize)
    }

    #[inline]
    pub fn get(&self, class: usize, x: u32, y: u32) -> f32 {
        self.probs[class * self.plane_len() + (y * self.width + x) as usize]
    }

    /// Check non-negativity and per-pixel sums within 1e-6 of one.
    pub fn validate(&self) -> Result<()> {
        let n = self.plane_len();
        for i in 0..n {
            let mut sum = 0.0f64;
            for c in 0..self.k {
                let v = self.probs[c * n + i];
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "probability {v} at pixel {i}, class {c}"
                    )));
                }
                sum += v as f64;
            }
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "pixel {i} probabilities sum to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// One grayscale plane, copied out.
    pub fn channel(&self, class: usize) -> GrayImage {
        let n = self.plane_len();
        GrayImage::from_pixels(
            self.width,
            self.height,
            self.probs[class * n..(class + 1) * n].to_vec(),
        )
        .expect("plane has matching length")
    }

    /// Per-pixel argmax as hard labels. Ties resolve to the lowest class id.
    pub fn argmax_labels(&self) -> LabelImage {
        let n = self.plane_len();
        let mut labels = vec![0u8; n];
        for (i, slot) in labels.iter_mut().enumerate() {
            let mut best = 0usize;
            let mut best_v = self.probs[i];
            for c in 1..self.k {
                let v = self.probs[c * n + i];
                if v > best_v {
                    best_v = v;
                    best = c;
                }
            }
            *slot = best as u8;
        }
        LabelImage::from_labels(self.width, self.height, labels).expect("argmax ids in range")
    }

    /// Scale one channel by `factor` in [0, 1], moving the removed mass to the
    /// background channel so each pixel still sums to one. Models reduced
    /// confidence in that channel (e.g. a weak lines response).
    pub fn attenuate_channel(&mut self, class: usize, factor: f32) {
        assert!((0.0..=1.0).contains(&factor), "factor must be in [0,1]");
        assert!(class != 0, "attenuating the background channel is ill-defined");
        let n = self.plane_len();
        for i in 0..n {
            let v = self.probs[class * n + i];
            let removed = v * (1.0 - factor);
            self.probs[class * n + i] = v * factor;
            self.probs[i] += removed;
        }
    }

    pub fn same_shape(&self, labels: &LabelImage) -> bool {
        self.width == labels.width() && self.height == labels.height()
    }
}

/// Numerically stabilized per-pixel softmax over k×h×w activations.
pub fn softmax_map(k: usize, width: u32, height: u32, activations: &[f32]) -> Result<ProbabilityMap> {
    let n = (width as usize) * (height as usize);
    if activations.len() != k * n {
        return Err(Error::ShapeMismatch(format!(
            "expected {} activations, got {}",
            k * n,
            activations.len()
        )));
    }
    if activations.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite activation".into()));
    }
    let mut probs = vec![0.0f32; k * n];
    for i in 0..n {
        let mut max = f32::NEG_INFINITY;
        for c in 0..k {
            max = max.max(activations[c * n + i]);
        }
        let mut denom = 0.0f64;
        for c in 0..k {
            denom += ((activations[c * n + i] - max) as f64).exp();
        }
        for c in 0..k {
            probs[c * n + i] = (((activations[c * n + i] - max) as f64).exp() / denom) as f32;
        }
    }
    ProbabilityMap::from_planes(k, width, height, probs)
}

/// Loss weighting mode: plain per-true-label weights, or the max-weight
/// variant that also looks at the predicted label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Xent,
    Mwx,
}

/// Per-class positive weights plus the mode they are used in. Class ids are
/// expected to be ordered so the weights are non-decreasing (background,
/// lines, corners under typical frequencies); [`class_weights`] reports a
/// relabel map when that ordering does not hold.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    pub mode: WeightMode,
    pub omega: [f64; NUM_CLASSES],
}

impl WeightScheme {
    pub fn new(mode: WeightMode, omega: [f64; NUM_CLASSES]) -> Result<Self> {
        if omega.iter().any(|&w| !w.is_finite() || w <= 0.0) {
            return Err(Error::InvalidInput("class weights must be positive".into()));
        }
        Ok(WeightScheme { mode, omega })
    }

    pub fn uniform(mode: WeightMode) -> Self {
        WeightScheme {
            mode,
            omega: [1.0; NUM_CLASSES],
        }
    }
}

/// Result of [`class_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights {
    /// omega_c = total / (K * count_c), in class-id order.
    pub omega: [f64; NUM_CLASSES],
    /// Classes whose count was floored to 1 pixel because they were absent.
    pub floored: [bool; NUM_CLASSES],
    /// Old-id -> new-id permutation that sorts omega non-decreasing, present
    /// only when the identity ordering does not already do so.
    pub relabel: Option<[u8; NUM_CLASSES]>,
}

/// Inverse-frequency class weights from a label image.
pub fn class_weights(labels: &LabelImage) -> ClassWeights {
    let total = labels.labels().len() as f64;
    let mut omega = [0.0; NUM_CLASSES];
    let mut floored = [false; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        let mut count = labels.class_count(c as u8) as f64;
        if count == 0.0 {
            count = 1.0;
            floored[c] = true;
        }
        omega[c] = total / (NUM_CLASSES as f64 * count);
    }
    let ordered = omega.windows(2).all(|w| w[0] <= w[1]);
    let relabel = if ordered {
        None
    } else {
        let mut ids: Vec<usize> = (0..NUM_CLASSES).collect();
        ids.sort_by(|&a, &b| omega[a].partial_cmp(&omega[b]).unwrap());
        let mut map = [0u8; NUM_CLASSES];
        for (new_id, &old_id) in ids.iter().enumerate() {
            map[old_id] = new_id as u8;
        }
        Some(map)
    };
    ClassWeights {
        omega,
        floored,
        relabel,
    }
}

/// Weighted negative log-likelihood over all pixels.
///
/// In `Xent` mode each pixel is weighted by its true label's omega; in `Mwx`
/// mode by omega of max(true, predicted) label id, which under the
/// non-decreasing-omega ordering equals the larger of the two weights.
pub fn weighted_xent(
    probs: &ProbabilityMap,
    labels: &LabelImage,
    scheme: &WeightScheme,
) -> Result<f64> {
    if !probs.same_shape(labels) {
        return Err(Error::ShapeMismatch(format!(
            "probabilities {}x{} vs labels {}x{}",
            probs.width(),
            probs.height(),
            labels.width(),
            labels.height()
        )));
    }
    if probs.k() != NUM_CLASSES {
        return Err(Error::ShapeMismatch(format!(
            "expected {NUM_CLASSES} classes, got {}",
            probs.k()
        )));
    }
    let n = (probs.width() as usize) * (probs.height() as usize);
    let planes = probs.probs();
    let mut loss = 0.0f64;
    for (i, &true_class) in labels.labels().iter().enumerate() {
        let truth = true_class as usize;
        let weight = match scheme.mode {
            WeightMode::Xent => scheme.omega[truth],
            WeightMode::Mwx => {
                let mut predicted = 0usize;
                let mut best = planes[i];
                for c in 1..NUM_CLASSES {
                    let v = planes[c * n + i];
                    if v > best {
                        best = v;
                        predicted = c;
                    }
                }
                scheme.omega[truth.max(predicted)]
            }
        };
        let p_true = (planes[truth * n + i] as f64).max(PROB_CLAMP);
        loss -= weight * p_true.ln();
    }
    Ok(loss)
}

/// Per-class and mean intersection-over-union.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IouReport {
    /// None for classes absent from both images (excluded from the mean).
    pub per_class: Vec<Option<f64>>,
    pub mean: f64,
}

pub fn iou(pred: &LabelImage, truth: &LabelImage) -> Result<IouReport> {
    if !pred.same_shape(truth) {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{} vs truth {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let mut intersection = [0usize; NUM_CLASSES];
    let mut union = [0usize; NUM_CLASSES];
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        if p == t {
            intersection[p as usize] += 1;
            union[p as usize] += 1;
        } else {
            union[p as usize] += 1;
            union[t as usize] += 1;
        }
    }
    let mut per_class = Vec::with_capacity(NUM_CLASSES);
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in 0..NUM_CLASSES {
        if union[c] == 0 {
            per_class.push(None);
        } else {
            let v = intersection[c] as f64 / union[c] as f64;
            per_class.push(Some(v));
            sum += v;
            present += 1;
        }
    }
    if present == 0 {
        return Err(Error::InvalidInput("empty images".into()));
    }
    Ok(IouReport {
        per_class,
        mean: sum / present as f64,
    })
}

/// Network shape spec: first-layer kernel, common kernel, depth, and
/// layers per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub k1: u32,
    pub k2: u32,
    pub depth: u32,
    pub layers: u32,
}

impl NetSpec {
    pub fn new(k1: u32, k2: u32, depth: u32, layers: u32) -> Result<Self> {
        if k1.is_multiple_of(2) || k2.is_multiple_of(2) || k1 == 0 || k2 == 0 {
            return Err(Error::InvalidInput("kernel sizes must be odd".into()));
        }
        if depth < 1 || layers < 1 {
            return Err(Error::InvalidInput("depth and layers must be >= 1".into()));
        }
        Ok(NetSpec {
            k1,
            k2,
            depth,
            layers,
        })
    }
}

/// Stage-by-stage size trace for one input size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReport {
    /// (stage name, activation size after the stage), in order.
    pub stages: Vec<(String, u32)>,
    /// Final output size, when every stage stayed >= 1.
    pub output: Option<u32>,
    /// Contracting-path size vs post-upsample size per skip connection,
    /// outermost level first.
    pub skips: Vec<(u32, u32)>,
    /// True when all sizes stayed integral-exact (even downsample inputs),
    /// every skip matched, and no stage collapsed below 1.
    pub feasible: bool,
    /// First stage that broke feasibility, if any.
    pub first_failure: Option<String>,
}

/// Simulate activation sizes through the mirrored valid-convolution U-Net.
///
/// Per level: a stride-2 size-2 valid conv halves (floor((n-2)/2)+1), the
/// matching transpose doubles (2(n-1)+2); `layers` valid convolutions run at
/// every level, with the very first using `k1` instead of `k2`. Crop-free
/// skip concatenation requires the post-upsample size to equal the
/// contracting size at the same level.
pub fn unet_shapes(spec: &NetSpec, input_size: u32) -> ShapeReport {
    let mut stages: Vec<(String, u32)> = vec![("input".into(), input_size)];
    let mut skips: Vec<(u32, u32)> = Vec::new();
    let mut first_failure: Option<String> = None;
    let mut completed = false;
    let mut n = input_size as i64;

    fn note(slot: &mut Option<String>, stage: &str) {
        if slot.is_none() {
            *slot = Some(stage.to_string());
        }
    }
    let conv = |n: i64, k: u32| n - (k as i64 - 1);

    let mut contracting: Vec<i64> = Vec::new();
    'walk: {
        // Entry level: the k1 conv, then layers-1 k2 convs.
        for layer in 0..spec.layers {
            let k = if layer == 0 { spec.k1 } else { spec.k2 };
            n = conv(n, k);
            let name = format!("conv0.{}(k{})", layer + 1, k);
            if n < 1 {
                note(&mut first_failure, &name);
                break 'walk;
            }
            stages.push((name, n as u32));
        }
        contracting.push(n);
        for level in 1..=spec.depth {
            let name = format!("down{level}");
            if n < 2 {
                note(&mut first_failure, &name);
                break 'walk;
            }
            if n % 2 != 0 {
                // floor((n-2)/2)+1 drops a pixel the transpose cannot restore.
                note(&mut first_failure, &name);
            }
            n = (n - 2) / 2 + 1;
            stages.push((name, n as u32));
            for layer in 0..spec.layers {
                n = conv(n, spec.k2);
                let name = format!("conv{level}.{}(k{})", layer + 1, spec.k2);
                if n < 1 {
                    note(&mut first_failure, &name);
                    break 'walk;
                }
                stages.push((name, n as u32));
            }
            if level < spec.depth {
                contracting.push(n);
            }
        }
        // Expanding path, bottom level upward.
        for level in (1..=spec.depth).rev() {
            n = 2 * (n - 1) + 2;
            let name = format!("up{level}");
            stages.push((name.clone(), n as u32));
            let skip = contracting[(level - 1) as usize];
            skips.push((skip as u32, n as u32));
            if skip != n {
                note(&mut first_failure, &name);
            }
            for layer in 0..spec.layers {
                n = conv(n, spec.k2);
                let name = format!("upconv{level}.{}(k{})", layer + 1, spec.k2);
                if n < 1 {
                    note(&mut first_failure, &name);
                    break 'walk;
                }
                stages.push((name, n as u32));
            }
        }
        completed = true;
    }

    skips.reverse();
    ShapeReport {
        output: completed.then(|| stages.last().map(|&(_, size)| size)).flatten(),
        feasible: completed && first_failure.is_none(),
        stages,
        skips,
        first_failure,
    }
}

/// Input sizes in `range` whose full trace is feasible (integral downsamples,
/// matching skips, no collapsed stage).
pub fn feasible_inputs(spec: &NetSpec, range: std::ops::RangeInclusive<u32>) -> Vec<u32> {
    range.filter(|&n| unet_shapes(spec, n).feasible).collect()
}
