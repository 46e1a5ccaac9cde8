//! Procedural line-art fixtures: small parametric sketches with seeded
//! jitter, so the full pipeline can be exercised hermetically without any
//! external drawing data.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sketch::{Point, Polyline, Sketch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    Line,
    XCross,
    Triangle,
    Square,
    Star,
    GridHatch,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 6] = [
        FixtureKind::Line,
        FixtureKind::XCross,
        FixtureKind::Triangle,
        FixtureKind::Square,
        FixtureKind::Star,
        FixtureKind::GridHatch,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FixtureKind::Line => "line",
            FixtureKind::XCross => "x_cross",
            FixtureKind::Triangle => "triangle",
            FixtureKind::Square => "square",
            FixtureKind::Star => "star",
            FixtureKind::GridHatch => "grid_hatch",
        }
    }

    pub fn from_name(name: &str) -> Result<FixtureKind> {
        FixtureKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown fixture kind {name:?}")))
    }

    /// Ground-truth edge count of the clean shape.
    pub fn true_edge_count(&self) -> usize {
        match self {
            FixtureKind::Line => 1,
            FixtureKind::XCross => 4,
            FixtureKind::Triangle => 3,
            FixtureKind::Square => 4,
            FixtureKind::Star => 6,
            FixtureKind::GridHatch => 24,
        }
    }

    fn index(&self) -> u64 {
        FixtureKind::ALL.iter().position(|k| k == self).unwrap() as u64
    }
}

fn jitter(rng: &mut ChaCha8Rng, p: (f64, f64), amount: f64) -> Point {
    Point::new(
        p.0 + rng.random_range(-amount..=amount),
        p.1 + rng.random_range(-amount..=amount),
    )
}

fn rotate_sketch(sketch: Sketch, angle: f64) -> Sketch {
    let (sin, cos) = angle.sin_cos();
    let center = Point::new(50.0, 50.0);
    let strokes = sketch
        .strokes
        .into_iter()
        .map(|poly| {
            let points = poly
                .points()
                .iter()
                .map(|p| {
                    let dx = p.x - center.x;
                    let dy = p.y - center.y;
                    Point::new(center.x + dx * cos - dy * sin, center.y + dx * sin + dy * cos)
                })
                .collect();
            Polyline::new(points).expect("rotation preserves validity")
        })
        .collect();
    Sketch::new(strokes)
}

/// Build one fixture sketch (raw coordinates, unnormalized) with seeded
/// vertex jitter and a small global rotation.
pub fn fixture(kind: FixtureKind, seed: u64) -> Sketch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind.index() << 32));
    let j = 1.5;
    let strokes: Vec<Vec<Point>> = match kind {
        FixtureKind::Line => {
            vec![vec![
                jitter(&mut rng, (12.0, 20.0), j),
                jitter(&mut rng, (88.0, 74.0), j),
            ]]
        }
        FixtureKind::XCross => {
            vec![
                vec![jitter(&mut rng, (12.0, 12.0), j), jitter(&mut rng, (88.0, 88.0), j)],
                vec![jitter(&mut rng, (12.0, 88.0), j), jitter(&mut rng, (88.0, 12.0), j)],
            ]
        }
        FixtureKind::Triangle => {
            // Three strokes sharing endpoints only approximately, inside the
            // corner merge radius.
            let a = jitter(&mut rng, (14.0, 82.0), j);
            let b = jitter(&mut rng, (86.0, 82.0), j);
            let c = jitter(&mut rng, (50.0, 16.0), j);
            let a2 = jitter(&mut rng, (a.x, a.y), 0.4);
            let b2 = jitter(&mut rng, (b.x, b.y), 0.4);
            let c2 = jitter(&mut rng, (c.x, c.y), 0.4);
            vec![vec![a, b], vec![b2, c], vec![c2, a2]]
        }
        FixtureKind::Square => {
            let corners = [
                jitter(&mut rng, (18.0, 18.0), j),
                jitter(&mut rng, (82.0, 18.0), j),
                jitter(&mut rng, (82.0, 82.0), j),
                jitter(&mut rng, (18.0, 82.0), j),
            ];
            vec![vec![corners[0], corners[1], corners[2], corners[3], corners[0]]]
        }
        FixtureKind::Star => {
            let center = Point::new(50.0, 50.0);
            (0..6)
                .map(|arm| {
                    let angle = arm as f64 * std::f64::consts::PI / 3.0
                        + rng.random_range(-0.06..=0.06);
                    let radius = 38.0 + rng.random_range(-3.0..=3.0);
                    let tip = Point::new(
                        center.x + radius * angle.cos(),
                        center.y + radius * angle.sin(),
                    );
                    vec![center, tip]
                })
                .collect()
        }
        FixtureKind::GridHatch => {
            let mut strokes = Vec::new();
            for i in 0..3 {
                let y = 26.0 + 24.0 * i as f64;
                strokes.push(vec![
                    jitter(&mut rng, (10.0, y), j),
                    jitter(&mut rng, (90.0, y), j),
                ]);
            }
            for i in 0..3 {
                let x = 26.0 + 24.0 * i as f64;
                strokes.push(vec![
                    jitter(&mut rng, (x, 10.0), j),
                    jitter(&mut rng, (x, 90.0), j),
                ]);
            }
            strokes
        }
    };
    let sketch = Sketch::new(
        strokes
            .into_iter()
            .map(|pts| Polyline::new(pts).expect("fixture strokes are valid"))
            .collect(),
    );
    let angle = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1)).random_range(-0.12..=0.12);
    rotate_sketch(sketch, angle)
}

/// Cycle through all fixture kinds, one seeded sketch per index.
pub fn fixture_set(count: usize, seed: u64) -> Vec<(FixtureKind, Sketch)> {
    (0..count)
        .map(|i| {
            let kind = FixtureKind::ALL[i % FixtureKind::ALL.len()];
            let sketch = fixture(kind, seed.wrapping_add((i as u64).wrapping_mul(0x9e3779b97f4a7c15)));
            (kind, sketch)
        })
        .collect()
}

/// Serialize sketches as simplified-format NDJSON records.
pub fn to_ndjson(fixtures: &[(FixtureKind, Sketch)]) -> String {
    let mut out = String::new();
    for (kind, sketch) in fixtures {
        let drawing: Vec<(Vec<f64>, Vec<f64>)> = sketch
            .strokes
            .iter()
            .map(|poly| {
                let xs = poly.points().iter().map(|p| p.x).collect();
                let ys = poly.points().iter().map(|p| p.y).collect();
                (xs, ys)
            })
            .collect();
        let record = serde_json::json!({ "word": kind.name(), "drawing": drawing });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    out
}
