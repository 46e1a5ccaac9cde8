//! Property tests for the geometric invariants of the sketch model and the
//! edge-threshold criterion.

use proptest::prelude::*;

use sketchgraph::graph::{propose_edges, PairTable, TauMap};
use sketchgraph::sketch::{
    normalize_with_margin, parse_stroke_file, segment_intersection, Point, Polyline, Segment,
    Sketch, StrokeFormat,
};

fn arb_point() -> impl Strategy<Value = Point> {
    (-100.0f64..100.0, -100.0f64..100.0).prop_map(|(x, y)| Point::new(x, y))
}

fn arb_polyline() -> impl Strategy<Value = Polyline> {
    proptest::collection::vec(arb_point(), 2..6).prop_filter_map("degenerate", |points| {
        let mut cleaned: Vec<Point> = Vec::new();
        for p in points {
            if cleaned.last() != Some(&p) {
                cleaned.push(p);
            }
        }
        (cleaned.len() >= 2).then(|| Polyline::new(cleaned).unwrap())
    })
}

fn arb_sketch() -> impl Strategy<Value = Sketch> {
    proptest::collection::vec(arb_polyline(), 1..4).prop_map(Sketch::new)
}

fn transform_sketch(sketch: &Sketch, scale: f64, dx: f64, dy: f64) -> Sketch {
    Sketch::new(
        sketch
            .strokes
            .iter()
            .map(|poly| {
                Polyline::new(
                    poly.points()
                        .iter()
                        .map(|p| Point::new(p.x * scale + dx, p.y * scale + dy))
                        .collect(),
                )
                .unwrap()
            })
            .collect(),
    )
}

proptest! {
    #[test]
    fn normalize_invariant_under_uniform_scale_and_translation(
        sketch in arb_sketch(),
        scale in 0.05f64..20.0,
        dx in -500.0f64..500.0,
        dy in -500.0f64..500.0,
    ) {
        let Ok(base) = normalize_with_margin(&sketch, 256, 6.0) else {
            return Ok(()); // zero-extent sketches are rejected either way
        };
        let moved = transform_sketch(&sketch, scale, dx, dy);
        let renormalized = normalize_with_margin(&moved, 256, 6.0).unwrap();
        for (a, b) in base.points().zip(renormalized.points()) {
            prop_assert!((a.x - b.x).abs() < 1e-6, "{} vs {}", a.x, b.x);
            prop_assert!((a.y - b.y).abs() < 1e-6, "{} vs {}", a.y, b.y);
        }
    }

    #[test]
    fn intersection_symmetric_and_rigid_equivariant(
        a in arb_point(), b in arb_point(), c in arb_point(), d in arb_point(),
        angle in 0.0f64..std::f64::consts::TAU,
        dx in -50.0f64..50.0,
        dy in -50.0f64..50.0,
    ) {
        prop_assume!(a != b && c != d);
        let s1 = Segment::new(a, b).unwrap();
        let s2 = Segment::new(c, d).unwrap();

        let forward = segment_intersection(&s1, &s2);
        let backward = segment_intersection(&s2, &s1);
        match (forward, backward) {
            (Some(p), Some(q)) => {
                prop_assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
            }
            (None, None) => {}
            other => prop_assert!(false, "asymmetric result {other:?}"),
        }

        // Rigid transforms commute with intersection. The 1e-9 tolerance is
        // asserted for well-conditioned crossings; near-parallel pairs (whose
        // solve amplifies rounding without bound) are skipped.
        let r = (b.x - a.x, b.y - a.y);
        let s = (d.x - c.x, d.y - c.y);
        let det = r.0 * s.1 - r.1 * s.0;
        let condition = det.abs() / (r.0.hypot(r.1) * s.0.hypot(s.1));
        if condition < 1e-3 {
            return Ok(());
        }
        let (sin, cos) = angle.sin_cos();
        let rigid = |p: Point| Point::new(p.x * cos - p.y * sin + dx, p.x * sin + p.y * cos + dy);
        let t1 = Segment::new(rigid(a), rigid(b)).unwrap();
        let t2 = Segment::new(rigid(c), rigid(d)).unwrap();
        if let (Some(p), Some(q)) = (forward, segment_intersection(&t1, &t2)) {
            let expected = rigid(p);
            prop_assert!((expected.x - q.x).abs() < 1e-9, "{} vs {}", expected.x, q.x);
            prop_assert!((expected.y - q.y).abs() < 1e-9, "{} vs {}", expected.y, q.y);
        }
    }

    #[test]
    fn sketch_json_roundtrip_exact(sketch in arb_sketch()) {
        let text = sketch.to_json();
        let back = Sketch::from_json(&text).unwrap();
        prop_assert_eq!(back, sketch);
    }

    #[test]
    fn ndjson_parse_roundtrip_preserves_coordinates(sketch in arb_sketch()) {
        let drawing: Vec<(Vec<f64>, Vec<f64>)> = sketch
            .strokes
            .iter()
            .map(|poly| {
                (
                    poly.points().iter().map(|p| p.x).collect(),
                    poly.points().iter().map(|p| p.y).collect(),
                )
            })
            .collect();
        let line = serde_json::to_string(&serde_json::json!({ "drawing": drawing })).unwrap();
        let parsed = parse_stroke_file(line.as_bytes(), StrokeFormat::NdjsonSimplified).unwrap();
        prop_assert_eq!(&parsed.sketches[0].strokes, &sketch.strokes);
    }

    #[test]
    fn edge_set_monotone_in_threshold(
        scores in proptest::collection::vec(0.0f64..1.0, 10),
        tau_low in 0.0f64..1.0,
        delta in 0.0f64..0.5,
        pair_index in 0usize..10,
    ) {
        // 5 vertices = 10 pairs.
        let mut table = PairTable::new(5, 0.0);
        for ((i, j), s) in table.pairs().collect::<Vec<_>>().into_iter().zip(&scores) {
            table.set(i, j, *s);
        }
        let low = propose_edges(&table, &TauMap::new(tau_low));
        let high = propose_edges(&table, &TauMap::new(tau_low + delta));
        prop_assert!(high.is_subset(&low), "raising tau added edges");

        // Per-pair: lowering one pair's tau never removes that edge, raising
        // it never adds it, and no other pair is affected.
        let (pi, pj) = table.pairs().nth(pair_index).unwrap();
        let mut lowered = TauMap::new(tau_low);
        lowered.set(pi, pj, tau_low - delta);
        let lowered_edges = propose_edges(&table, &lowered);
        prop_assert!(lowered_edges.is_superset(&low));
        prop_assert!(lowered_edges.difference(&low).all(|&e| e == (pi, pj)));

        let mut raised = TauMap::new(tau_low);
        raised.set(pi, pj, tau_low + delta);
        let raised_edges = propose_edges(&table, &raised);
        prop_assert!(raised_edges.is_subset(&low));
        prop_assert!(low.difference(&raised_edges).all(|&e| e == (pi, pj)));
    }
}
