//! Command-line front end for the vectorization pipeline: dataset synthesis,
//! end-to-end vectorization, metric evaluation, the threshold-separation
//! study, and hermetic fixture generation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sketchgraph::config::PipelineConfig;
use sketchgraph::dataset::{generate_dataset, Manifest};
use sketchgraph::emit::{to_gcode, to_svg};
use sketchgraph::eval::{class_weights, iou, weighted_xent, ProbabilityMap, WeightMode, WeightScheme};
use sketchgraph::fixtures::{fixture_set, to_ndjson, FixtureKind};
use sketchgraph::graph::{interpret, FIXED_TAU_PRESETS};
use sketchgraph::io;
use sketchgraph::raster::labels_to_probmap;
use sketchgraph::sketch::{parse_stroke_file, StrokeFormat};
use sketchgraph::strokes::{strokes_gen, strokes_to_points, AdjacencyList};
use sketchgraph::study::{preset_sweep, threshold_study, StudyParams, StudySample};
use sketchgraph::{Error, Result};

#[derive(Parser)]
#[command(name = "sketchgraph", version, about = "Line-art to stroke-graph vectorizer and plotter toolpath generator")]
struct Cli {
    /// JSON config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceFormat {
    Ndjson,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitChoice {
    All,
    Train,
    Test,
}

#[derive(Args, Clone)]
struct RasterFlags {
    /// Canvas size in pixels.
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    stroke_width: Option<f64>,
    #[arg(long)]
    corner_radius: Option<f64>,
}

impl RasterFlags {
    fn apply(&self, config: &mut PipelineConfig) {
        if let Some(s) = self.s {
            config.raster.canvas_size = s;
        }
        if let Some(w) = self.stroke_width {
            config.raster.stroke_width = w;
        }
        if let Some(r) = self.corner_radius {
            config.raster.corner_radius = r;
        }
    }
}

#[derive(Args, Clone)]
struct InterpFlags {
    /// Plausibility mask width in pixels.
    #[arg(long)]
    beta: Option<f64>,
    /// Initial plausibility threshold.
    #[arg(long)]
    tau0: Option<f64>,
    /// Threshold update rate.
    #[arg(long)]
    lambda: Option<f64>,
    /// Feedback iterations.
    #[arg(long)]
    n_iters: Option<u32>,
    #[arg(long)]
    binarize_threshold: Option<f32>,
    #[arg(long)]
    min_blob_area: Option<usize>,
    #[arg(long)]
    dilate_px: Option<u32>,
    #[arg(long)]
    max_edge_length: Option<f64>,
}

impl InterpFlags {
    fn apply(&self, config: &mut PipelineConfig) {
        let p = &mut config.interp;
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.tau0 {
            p.tau0 = v;
        }
        if let Some(v) = self.lambda {
            p.lambda = v;
        }
        if let Some(v) = self.n_iters {
            p.n_iters = v;
        }
        if let Some(v) = self.binarize_threshold {
            p.binarize_threshold = v;
        }
        if let Some(v) = self.min_blob_area {
            p.min_blob_area = v;
        }
        if let Some(v) = self.dilate_px {
            p.dilate_px = v;
        }
        if let Some(v) = self.max_edge_length {
            p.max_edge_length = Some(v);
        }
    }
}

#[derive(Args, Clone)]
struct FrameFlags {
    /// Drawing box size in mm.
    #[arg(long)]
    box_size: Option<f64>,
    /// Machine origin, mm, as "x,y".
    #[arg(long)]
    origin: Option<String>,
    #[arg(long)]
    safe_z: Option<f64>,
    #[arg(long)]
    unit_scale: Option<f64>,
}

impl FrameFlags {
    fn apply(&self, config: &mut PipelineConfig) -> Result<()> {
        if let Some(v) = self.box_size {
            config.frame.box_size_mm = v;
        }
        if let Some(origin) = &self.origin {
            let parts: Vec<&str> = origin.split(',').collect();
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad origin component {s:?}")))
            };
            if parts.len() != 2 {
                return Err(Error::InvalidInput(format!("bad origin {origin:?}, want x,y")));
            }
            config.frame.origin_mm = sketchgraph::sketch::Point::new(parse(parts[0])?, parse(parts[1])?);
        }
        if let Some(v) = self.safe_z {
            config.frame.safe_z_mm = v;
        }
        if let Some(v) = self.unit_scale {
            config.frame.unit_scale = v;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate procedural fixture sketches as an NDJSON stroke file.
    Fixture {
        /// Output NDJSON path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 6)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of kinds (line, x_cross, triangle, square,
        /// star, grid_hatch).
        #[arg(long)]
        kinds: Option<String>,
    },
    /// Synthesize a train/test dataset from a stroke file.
    Dataset {
        /// Source stroke file (Quick-draw style).
        #[arg(long)]
        source: PathBuf,
        #[arg(long, value_enum, default_value_t = SourceFormat::Ndjson)]
        format: SourceFormat,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Use only the first N drawings.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        train_fraction: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        raster: RasterFlags,
    },
    /// Interpret one image into a stroke graph and emit all artifacts.
    Vectorize {
        /// Input grayscale PNG.
        #[arg(long)]
        input: PathBuf,
        /// Oracle labels PNG (class ids 0..2).
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Probability-map raw file.
        #[arg(long)]
        probmap: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        interp: InterpFlags,
        #[command(flatten)]
        frame: FrameFlags,
    },
    /// Evaluate a predicted segmentation against truth labels.
    Eval {
        /// Prediction: labels PNG or probability-map raw file.
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth labels PNG.
        #[arg(long)]
        truth: PathBuf,
        /// Metrics JSON output path (printed to stdout as well).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold-separation study and fixed-threshold preset sweep.
    Study {
        /// Dataset manifest path.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated mask widths.
        #[arg(long, default_value = "3,5,7")]
        betas: String,
        #[arg(long, default_value_t = 3)]
        smoothing_k: usize,
        #[arg(long, default_value_t = 50)]
        nonedge_samples: usize,
        #[arg(long, value_enum, default_value_t = SplitChoice::All)]
        split: SplitChoice,
        /// Also run the fixed (beta, tau) preset sweep against the adaptive
        /// loop.
        #[arg(long)]
        presets: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::File {
        path: dir.to_path_buf(),
        source,
    })
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let mut config = load_config(&cli.config)?;

    match cli.command {
        Command::Fixture {
            out,
            count,
            seed,
            kinds,
        } => {
            if count == 0 {
                return Err(Error::InvalidInput("empty fixture set requested".into()));
            }
            let seed = seed.unwrap_or(config.seed);
            let mut fixtures = fixture_set(count, seed);
            if let Some(kinds) = kinds {
                let wanted: Vec<FixtureKind> = kinds
                    .split(',')
                    .map(|k| FixtureKind::from_name(k.trim()))
                    .collect::<Result<_>>()?;
                fixtures = (0..count)
                    .map(|i| {
                        let kind = wanted[i % wanted.len()];
                        let sketch = sketchgraph::fixtures::fixture(
                            kind,
                            seed.wrapping_add((i as u64).wrapping_mul(0x9e3779b97f4a7c15)),
                        );
                        (kind, sketch)
                    })
                    .collect();
            }
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    ensure_dir(parent)?;
                }
            }
            io::write_text(&out, &to_ndjson(&fixtures))?;
            println!("wrote {} fixtures to {}", fixtures.len(), out.display());
            Ok(())
        }

        Command::Dataset {
            source,
            format,
            out,
            count,
            train_fraction,
            seed,
            raster,
        } => {
            raster.apply(&mut config);
            if let Some(f) = train_fraction {
                config.train_fraction = f;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            config.validate()?;
            if count == Some(0) {
                return Err(Error::InvalidInput("empty dataset requested".into()));
            }
            let bytes = std::fs::read(&source).map_err(|e| Error::File {
                path: source.clone(),
                source: e,
            })?;
            let stroke_format = match format {
                SourceFormat::Ndjson => StrokeFormat::NdjsonSimplified,
                SourceFormat::Json => StrokeFormat::PlainJson,
            };
            let parsed = parse_stroke_file(&bytes, stroke_format)?;
            if parsed.skipped_strokes > 0 {
                eprintln!("warning: skipped {} short strokes", parsed.skipped_strokes);
            }
            let mut sketches = parsed.sketches;
            if let Some(n) = count {
                sketches.truncate(n);
            }
            ensure_dir(&out)?;
            let manifest = generate_dataset(
                &sketches,
                &out,
                &config.raster,
                config.train_fraction,
                config.seed,
            )?;
            config.save(&out.join("effective_config.json"))?;
            println!(
                "{} train + {} test samples; manifest at {}",
                manifest.train_count,
                manifest.test_count,
                out.join("manifest.json").display()
            );
            Ok(())
        }

        Command::Vectorize {
            input,
            labels,
            probmap,
            out,
            interp,
            frame,
        } => {
            interp.apply(&mut config);
            frame.apply(&mut config)?;
            config.validate()?;
            let x = io::read_gray_png(&input)?;
            let probs: ProbabilityMap = match (&labels, &probmap) {
                (Some(path), None) => labels_to_probmap(&io::read_labels_png(path)?),
                (None, Some(path)) => io::read_probmap(path)?,
                _ => {
                    return Err(Error::InvalidInput(
                        "provide exactly one of --labels or --probmap".into(),
                    ))
                }
            };
            ensure_dir(&out)?;
            let (graph, diagnostics) = interpret(&x, &probs, &config.interp)?;
            if graph.vertices.len() < 2 {
                eprintln!(
                    "warning: {} vertices detected; emitting empty outputs",
                    graph.vertices.len()
                );
            }
            for (i, it) in diagnostics.iterations.iter().enumerate() {
                println!(
                    "iter {:2}: edges {:4}  absent {:3}  superfluous {:3}  tau [{:.4}, {:.4}]",
                    i + 1,
                    it.edges,
                    it.absent,
                    it.superfluous,
                    it.tau_min,
                    it.tau_max
                );
            }
            io::write_graph_json(
                &out.join("graph.json"),
                &io::GraphFile::new(&graph.vertices, graph.edges.iter().copied()),
            )?;
            io::write_json_pretty(&out.join("diagnostics.json"), &diagnostics)?;

            let adjacency =
                AdjacencyList::from_edges(graph.vertices.len(), graph.edges.iter().copied())?;
            let sequence = strokes_gen(&adjacency)?;
            let polylines = strokes_to_points(&sequence, &graph.vertices)?;
            io::write_strokes_json(
                &out.join("strokes.json"),
                &io::StrokesFile::from_polylines(&polylines),
            )?;

            let canvas = x.width();
            let program = to_gcode(&polylines, canvas, &config.frame)?;
            io::write_text(&out.join("plot.gcode"), &program.text())?;
            io::write_text(&out.join("plot.svg"), &to_svg(&polylines, canvas))?;
            config.save(&out.join("effective_config.json"))?;
            println!(
                "{} vertices, {} edges, {} strokes -> {}",
                graph.vertices.len(),
                graph.edges.len(),
                polylines.len(),
                out.display()
            );
            Ok(())
        }

        Command::Eval { pred, truth, out } => {
            let truth_labels = io::read_labels_png(&truth)?;
            let pred_probs = if pred.extension().and_then(|e| e.to_str()) == Some("png") {
                labels_to_probmap(&io::read_labels_png(&pred)?)
            } else {
                io::read_probmap(&pred)?
            };
            let pred_labels = pred_probs.argmax_labels();
            let iou_report = iou(&pred_labels, &truth_labels)?;
            let omega = class_weights(&truth_labels).omega;
            let xent = weighted_xent(
                &pred_probs,
                &truth_labels,
                &WeightScheme::new(WeightMode::Xent, omega)?,
            )?;
            let mwx = weighted_xent(
                &pred_probs,
                &truth_labels,
                &WeightScheme::new(WeightMode::Mwx, omega)?,
            )?;
            let metrics = serde_json::json!({
                "iou": { "per_class": iou_report.per_class, "mean": iou_report.mean },
                "loss": { "xent": xent, "mwx": mwx },
            });
            let text = serde_json::to_string_pretty(&metrics)?;
            // Tolerate a closed stdout (e.g. piping into `head`).
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{text}");
            if let Some(path) = out {
                io::write_text(&path, &format!("{text}\n"))?;
            }
            Ok(())
        }

        Command::Study {
            manifest,
            out,
            betas,
            smoothing_k,
            nonedge_samples,
            split,
            presets,
            seed,
        } => {
            if let Some(s) = seed {
                config.seed = s;
            }
            let manifest_dir = manifest
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let manifest = Manifest::load(&manifest)?;
            let betas: Vec<f64> = betas
                .split(',')
                .map(|b| {
                    b.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad beta {b:?}")))
                })
                .collect::<Result<_>>()?;
            if betas.is_empty() {
                return Err(Error::InvalidInput("no betas given".into()));
            }
            let samples = load_study_samples(&manifest, &manifest_dir, split)?;
            if samples.is_empty() {
                return Err(Error::InvalidInput("empty dataset".into()));
            }
            ensure_dir(&out)?;
            let params = StudyParams {
                betas,
                smoothing_k,
                nonedge_samples,
                seed: config.seed,
                interp: config.interp.clone(),
                ..StudyParams::default()
            };
            let studies = threshold_study(&samples, &params);
            for study in &studies {
                let path = out.join(format!("tau_hat_beta_{}.csv", study.beta));
                let mut csv = String::from(
                    "tau_hat,eta_bar,margin,min_true_eta,max_nonedge_eta,separated,true_edges,pairs\n",
                );
                for e in &study.entries {
                    csv.push_str(&format!(
                        "{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}\n",
                        e.tau_hat,
                        e.eta_bar,
                        e.margin,
                        e.min_true_eta,
                        e.max_nonedge_eta,
                        e.separated,
                        e.true_edges,
                        e.pairs
                    ));
                }
                io::write_text(&path, &csv)?;
                println!(
                    "beta {}: {} images ({} skipped), separated {:.1}%, tau-hat peaks {}",
                    study.beta,
                    study.entries.len(),
                    study.skipped,
                    study.separated_fraction * 100.0,
                    study.tau_hat_histogram.smoothed_peak_count(smoothing_k)
                );
            }
            io::write_json_pretty(&out.join("study.json"), &studies)?;

            if presets {
                let report = preset_sweep(&samples, &FIXED_TAU_PRESETS, &params)?;
                println!(
                    "adaptive (beta {}, tau0 {}): F1 {:.4}",
                    report.adaptive.beta, report.adaptive.tau, report.adaptive.mean_f1
                );
                for p in &report.presets {
                    println!(
                        "preset (beta {}, tau {}): F1 {:.4}  P {:.4}  R {:.4}",
                        p.beta, p.tau, p.mean_f1, p.mean_precision, p.mean_recall
                    );
                }
                io::write_json_pretty(&out.join("presets.json"), &report)?;
            }
            config.save(&out.join("effective_config.json"))?;
            Ok(())
        }
    }
}

fn load_study_samples(
    manifest: &Manifest,
    base: &Path,
    split: SplitChoice,
) -> Result<Vec<StudySample>> {
    let mut samples = Vec::new();
    for entry in &manifest.samples {
        let keep = match split {
            SplitChoice::All => true,
            SplitChoice::Train => entry.split == sketchgraph::dataset::Split::Train,
            SplitChoice::Test => entry.split == sketchgraph::dataset::Split::Test,
        };
        if !keep {
            continue;
        }
        let input = io::read_gray_png(&base.join(&entry.input))?;
        let labels = io::read_labels_png(&base.join(&entry.labels))?;
        let graph = io::read_graph_json(&base.join(&entry.graph))?;
        let truth_edges: BTreeSet<(usize, usize)> = graph.edges.iter().copied().collect();
        samples.push(StudySample {
            input,
            probs: labels_to_probmap(&labels),
            truth_vertices: graph.vertex_points(),
            truth_edges,
        });
    }
    Ok(samples)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
