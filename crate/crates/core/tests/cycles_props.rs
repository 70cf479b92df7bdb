mod common;

use common::peaks_oracle;
use lvef_core::cycles::{detect_cycles, find_peaks, prominence, AreaSeries, PeakParams};
use lvef_core::refine::refine_cycle_areas;
use lvef_core::rng::SplitMix64;
use lvef_core::CardiacCycle;
use proptest::prelude::*;

/// Random walks on a small integer lattice so plateaus and ties appear.
fn lattice_series() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-3i32..=3, 3..200).prop_map(|steps| {
        let mut level = 50i32;
        steps
            .into_iter()
            .map(|s| {
                level = (level + s).clamp(0, 100);
                level as f64
            })
            .collect()
    })
}

fn params() -> impl Strategy<Value = PeakParams> {
    (1usize..40, 0.01f64..0.99).prop_map(|(min_distance, prominence_fraction)| PeakParams {
        min_distance,
        prominence_fraction,
    })
}

#[test]
fn peaks_match_oracle_on_random_series() {
    let mut r = SplitMix64::new(2024);
    for _ in 0..1000 {
        let n = 3 + r.below(198);
        let x: Vec<f64> = (0..n).map(|_| (r.next_f64() * 20.0).floor()).collect();
        let p = PeakParams { min_distance: 1 + r.below(30), prominence_fraction: 0.05 + 0.9 * r.next_f64() };
        let got = find_peaks(&AreaSeries::new("r", x.clone()), &p);
        assert_eq!(got, peaks_oracle(&x, p.min_distance, p.prominence_fraction), "{x:?} {p:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn peaks_equal_oracle(x in lattice_series(), p in params()) {
        let got = find_peaks(&AreaSeries::new("p", x.clone()), &p);
        prop_assert_eq!(got, peaks_oracle(&x, p.min_distance, p.prominence_fraction));
    }

    #[test]
    fn peaks_are_spaced_and_prominent(x in lattice_series(), p in params()) {
        let peaks = find_peaks(&AreaSeries::new("p", x.clone()), &p);
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for w in peaks.windows(2) {
            prop_assert!(w[1] - w[0] >= p.min_distance);
        }
        for &k in &peaks {
            prop_assert!(prominence(&x, k) >= p.prominence_fraction * (hi - lo));
        }
    }

    #[test]
    fn peaks_ignore_offsets(x in lattice_series(), p in params(), c in -1000i32..1000) {
        let shifted: Vec<f64> = x.iter().map(|v| v + c as f64).collect();
        prop_assert_eq!(
            find_peaks(&AreaSeries::new("a", x), &p),
            find_peaks(&AreaSeries::new("b", shifted), &p)
        );
    }

    #[test]
    fn cycles_are_ordered_and_disjoint(x in lattice_series(), p in params()) {
        if let Ok(cycles) = detect_cycles(&AreaSeries::new("c", x.clone()), &p) {
            for c in &cycles {
                prop_assert!(c.ed_frame < c.es_frame && x[c.ed_frame] > x[c.es_frame]);
            }
            for w in cycles.windows(2) {
                prop_assert!(w[0].es_frame < w[1].ed_frame);
            }
        }
    }

    #[test]
    fn refined_areas_stay_in_range(x in lattice_series(), p in params(), fraction in 0.01f64..=0.5) {
        let series = AreaSeries::new("r", x.clone());
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for c in detect_cycles(&series, &p).unwrap_or_default() {
            let (ed, es) = refine_cycle_areas(&series, &c, fraction).unwrap();
            prop_assert!(lo <= es && es <= ed && ed <= hi, "{es} {ed}");
        }
    }

    #[test]
    fn refinement_shifts_with_the_series(
        x in lattice_series(),
        ed in 0usize..100,
        span in 1usize..100,
        fraction in 0.01f64..=1.0,
        c in -64i32..64,
    ) {
        let cycle = CardiacCycle { ed_frame: ed % (x.len() - 1), es_frame: 0 };
        let cycle = CardiacCycle { es_frame: (cycle.ed_frame + span).min(x.len() - 1), ..cycle };
        let (a, b) = refine_cycle_areas(&AreaSeries::new("a", x.clone()), &cycle, fraction).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c as f64).collect();
        let (sa, sb) = refine_cycle_areas(&AreaSeries::new("b", shifted), &cycle, fraction).unwrap();
        // equal in exact arithmetic; the mean's final division rounds
        prop_assert!((sa - a - c as f64).abs() <= 1e-12 * 200.0);
        prop_assert!((sb - b - c as f64).abs() <= 1e-12 * 200.0);
    }

    #[test]
    fn full_fraction_on_constant_series(v in 0.0f64..1e4, n in 2usize..100) {
        let cycle = CardiacCycle { ed_frame: 0, es_frame: n - 1 };
        let (ed, es) = refine_cycle_areas(&AreaSeries::new("k", vec![v; n]), &cycle, 1.0).unwrap();
        prop_assert_eq!((ed, es), (v, v));
    }
}
