use std::f64::consts::PI;

use lvef_core::dataset::{Segment, TraceFrame};
use lvef_core::geometry::{dice, rasterize_polygon, shoelace_area, trace_length};
use lvef_core::{extract_features, Mask, Polygon};
use proptest::prelude::*;

/// Convex polygon from sorted angles on an ellipse around `(cx, cy)`.
fn convex(cx: f64, cy: f64, rx: f64, ry: f64, mut angles: Vec<f64>) -> Polygon {
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let pts: Vec<(f64, f64)> = angles.iter().map(|a| (cx + rx * a.cos(), cy + ry * a.sin())).collect();
    Polygon::from_xy(&pts)
}

fn polygon() -> impl Strategy<Value = Polygon> {
    (
        20.0f64..80.0,
        20.0f64..80.0,
        2.0f64..19.0,
        2.0f64..19.0,
        proptest::collection::vec(0.0f64..2.0 * PI, 3..16),
    )
        .prop_map(|(cx, cy, rx, ry, a)| convex(cx, cy, rx, ry, a))
}

fn mask() -> impl Strategy<Value = Mask> {
    (2usize..20, 2usize..20, proptest::collection::vec(any::<bool>(), 400))
        .prop_map(|(w, h, bits)| Mask::from_fn(w, h, |x, y| bits[y * 20 + x]))
}

proptest! {
    #[test]
    fn shoelace_invariances(p in polygon(), dx in -15.0f64..15.0, dy in -15.0f64..15.0, s in 0.1f64..5.0) {
        let a = shoelace_area(&p);
        let moved = Polygon::from_xy(&p.vertices.iter().map(|v| (v.x + dx, v.y + dy)).collect::<Vec<_>>());
        let mut reversed = p.clone();
        reversed.vertices.reverse();
        let scaled = Polygon::from_xy(&p.vertices.iter().map(|v| (s * v.x, s * v.y)).collect::<Vec<_>>());
        prop_assert!((shoelace_area(&moved) - a).abs() <= 1e-9 * a.max(1.0) * 100.0);
        prop_assert!((shoelace_area(&reversed) - a).abs() <= 1e-12 * a.max(1.0) * 100.0);
        prop_assert!((shoelace_area(&scaled) - s * s * a).abs() <= 1e-9 * (s * s * a).max(1.0));
    }

    #[test]
    fn raster_error_within_perimeter(p in polygon()) {
        let m = rasterize_polygon(&p, 100, 100).unwrap();
        let err = (m.count() as f64 - shoelace_area(&p)).abs();
        prop_assert!(err <= p.perimeter(), "{err} > {}", p.perimeter());
    }

    #[test]
    fn features_ignore_translation(m in mask(), dx in 0usize..10, dy in 0usize..10) {
        let (w, h) = m.dims();
        let moved = Mask::from_fn(w + 10, h + 10, |x, y| {
            x >= dx && y >= dy && x - dx < w && y - dy < h && m.get(x - dx, y - dy)
        });
        let (a, b) = (extract_features(&m, 0), extract_features(&moved, 0));
        prop_assert_eq!(a.area, b.area);
        prop_assert!((a.width - b.width).abs() <= 1e-9 && (a.height - b.height).abs() <= 1e-9);
    }

    #[test]
    fn features_survive_quarter_turns(m in mask()) {
        let (w, h) = m.dims();
        let turned = Mask::from_fn(h, w, |x, y| m.get(y, h - 1 - x));
        let (a, b) = (extract_features(&m, 0), extract_features(&turned, 0));
        prop_assert_eq!(a.area, b.area);
        prop_assert!((a.width - b.width).abs() <= 1e-9, "{} {}", a.width, b.width);
        prop_assert!((a.height - b.height).abs() <= 1e-9, "{} {}", a.height, b.height);
    }

    #[test]
    fn dice_is_symmetric(a in mask(), bits in proptest::collection::vec(any::<bool>(), 400)) {
        let (w, h) = a.dims();
        let b = Mask::from_fn(w, h, |x, y| bits[y * 20 + x]);
        let d = dice(&a, &b).unwrap();
        prop_assert_eq!(d, dice(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn trace_length_scales(x1 in 0.0f64..112.0, y1 in 0.0f64..112.0, x2 in 0.0f64..112.0, y2 in 0.0f64..112.0, s in 0.1f64..10.0) {
        let frame = |k: f64| TraceFrame {
            file_name: "v.avi".into(),
            frame_index: 3,
            segments: vec![Segment::new(k * x1, k * y1, k * x2, k * y2), Segment::new(0.0, 0.0, k, k)],
        };
        let base = trace_length(&frame(1.0));
        prop_assert!((trace_length(&frame(s)) - s * base).abs() <= 1e-12 * (s * base).max(1.0));
    }
}
