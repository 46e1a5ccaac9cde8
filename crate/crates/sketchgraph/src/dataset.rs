//! On-disk dataset generation: per-sample input image, label image, and a
//! ground-truth graph sidecar, split into train/test by a seeded shuffle.
//! Generation is a pure function of (source, params, seed); re-runs are
//! byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{write_graph_json, write_gray_png, write_json_pretty, write_labels_png, GraphFile};
use crate::raster::{make_labels, CornerAccumulator};
use crate::sketch::{normalize, sketch_intersections, Point, Sketch};

/// Rasterization parameters shared by dataset generation and the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RasterParams {
    pub canvas_size: u32,
    pub stroke_width: f64,
    pub corner_radius: f64,
}

impl Default for RasterParams {
    fn default() -> Self {
        RasterParams {
            canvas_size: 256,
            stroke_width: 2.0,
            corner_radius: 3.0,
        }
    }
}

/// The corner set and adjacent-corner edges of a normalized sketch.
///
/// Corners are accumulated in canonical order (polyline vertices, then
/// pairwise intersections, deduplicated within the corner radius); edges
/// connect consecutive corners along each polyline, split at intersection
/// points projected onto the segments.
pub fn ground_truth_graph(
    sketch: &Sketch,
    corner_radius: f64,
) -> (Vec<Point>, BTreeSet<(usize, usize)>) {
    let mut acc = CornerAccumulator::new(corner_radius);
    for stroke in &sketch.strokes {
        for &p in stroke.points() {
            acc.index_of(p);
        }
    }
    let hits = sketch_intersections(sketch);
    for hit in &hits {
        acc.index_of(hit.point);
    }

    // Intersections per (stroke, segment), with their parametric position.
    let mut splits: BTreeMap<(usize, usize), Vec<(f64, Point)>> = BTreeMap::new();
    for hit in &hits {
        splits
            .entry((hit.first.stroke, hit.first.segment))
            .or_default()
            .push((hit.t_first, hit.point));
        splits
            .entry((hit.second.stroke, hit.second.segment))
            .or_default()
            .push((hit.t_second, hit.point));
    }
    for list in splits.values_mut() {
        list.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }

    let mut edges = BTreeSet::new();
    for (stroke_idx, stroke) in sketch.strokes.iter().enumerate() {
        let points = stroke.points();
        let mut previous = acc.index_of(points[0]);
        for seg_idx in 0..points.len() - 1 {
            if let Some(list) = splits.get(&(stroke_idx, seg_idx)) {
                for &(_, p) in list {
                    let here = acc.index_of(p);
                    if here != previous {
                        edges.insert((previous.min(here), previous.max(here)));
                    }
                    previous = here;
                }
            }
            let end = acc.index_of(points[seg_idx + 1]);
            if end != previous {
                edges.insert((previous.min(end), previous.max(end)));
            }
            previous = end;
        }
    }
    (acc.into_points(), edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub id: String,
    pub split: Split,
    pub source_index: usize,
    pub input: String,
    pub labels: String,
    pub graph: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub params: RasterParams,
    pub seed: u64,
    pub train_fraction: f64,
    pub train_count: usize,
    pub test_count: usize,
    pub samples: Vec<SampleEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Generate the dataset under `out_dir` and write `manifest.json`.
///
/// Split membership: floor(n * train_fraction) samples go to train after a
/// seeded shuffle of the source indices; the manifest lists samples by
/// source index regardless of split.
pub fn generate_dataset(
    source: &[Sketch],
    out_dir: &Path,
    params: &RasterParams,
    train_fraction: f64,
    seed: u64,
) -> Result<Manifest> {
    if source.is_empty() {
        return Err(Error::InvalidInput("empty dataset requested".into()));
    }
    if !(0.0..1.0).contains(&train_fraction) {
        return Err(Error::InvalidInput(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let train_dir = out_dir.join("train");
    let test_dir = out_dir.join("test");
    fs::create_dir_all(&train_dir).map_err(|source| Error::File {
        path: train_dir.clone(),
        source,
    })?;
    fs::create_dir_all(&test_dir).map_err(|source| Error::File {
        path: test_dir.clone(),
        source,
    })?;

    let mut indices: Vec<usize> = (0..source.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train_count = (source.len() as f64 * train_fraction).floor() as usize;
    let mut split_of = vec![Split::Test; source.len()];
    for &idx in indices.iter().take(train_count) {
        split_of[idx] = Split::Train;
    }

    let mut samples = Vec::with_capacity(source.len());
    let mut seen_ids = BTreeSet::new();
    for (source_index, sketch) in source.iter().enumerate() {
        let id = format!("{source_index:06}");
        if !seen_ids.insert(id.clone()) {
            return Err(Error::InvalidInput(format!("duplicate sample id {id}")));
        }
        let split = split_of[source_index];
        let dir = match split {
            Split::Train => &train_dir,
            Split::Test => &test_dir,
        };
        let normalized = normalize(
            sketch,
            params.canvas_size,
            params.stroke_width,
            params.corner_radius,
        )?;
        let (input, labels) = make_labels(&normalized, params.stroke_width, params.corner_radius)?;
        let (vertices, edges) = ground_truth_graph(&normalized, params.corner_radius);

        let input_path = dir.join(format!("{id}.input.png"));
        let labels_path = dir.join(format!("{id}.labels.png"));
        let graph_path = dir.join(format!("{id}.graph.json"));
        write_gray_png(&input_path, &input)?;
        write_labels_png(&labels_path, &labels)?;
        write_graph_json(&graph_path, &GraphFile::new(&vertices, edges))?;

        let rel = |p: &PathBuf| {
            p.strip_prefix(out_dir)
                .expect("sample paths live under out_dir")
                .to_string_lossy()
                .into_owned()
        };
        samples.push(SampleEntry {
            id,
            split,
            source_index,
            input: rel(&input_path),
            labels: rel(&labels_path),
            graph: rel(&graph_path),
        });
    }

    let manifest = Manifest {
        params: *params,
        seed,
        train_fraction,
        train_count,
        test_count: source.len() - train_count,
        samples,
    };
    write_json_pretty(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
