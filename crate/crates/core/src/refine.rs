//! ED/ES area refinement.
//!
//! The improved Jeffrey's estimate of a cycle's ED area is the plain mean of
//! the multiset made of
//!
//! 1. the area at the ED frame,
//! 2. the largest `⌈f·N⌉` areas of the whole video (`N` frames),
//! 3. the largest `⌈f·M⌉` areas within the cycle window `[ed, es]`
//!    (`M = es - ed + 1` frames, both ends included).
//!
//! The ES area mirrors this with the ES frame and the smallest areas.
//! Counts are at least one and at most the population size.

use thiserror::Error;

use crate::cycles::{AreaSeries, CardiacCycle};
use crate::stats::percentile;

#[derive(Debug, Error, PartialEq)]
pub enum RefineError {
    #[error("cycle ed={ed} es={es} is not valid for a series of {len} frames")]
    InvalidCycle { ed: usize, es: usize, len: usize },
    #[error("fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("empty area series")]
    EmptySeries,
}

pub const DEFAULT_FRACTION: f64 = 0.10;

/// `⌈fraction·n⌉` clamped to `1..=n`. A relative slack absorbs products such
/// as `0.1 * 30 = 3.0000000000000004` that would otherwise round up.
pub fn selection_count(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    let k = (raw - raw.abs() * 1e-12).ceil() as usize;
    k.clamp(1, n.max(1))
}

fn top_k(values: &[f64], k: usize, descending: bool) -> impl Iterator<Item = f64> {
    let mut sorted = values.to_vec();
    if descending {
        sorted.sort_by(|a, b| b.total_cmp(a));
    } else {
        sorted.sort_by(f64::total_cmp);
    }
    sorted.into_iter().take(k)
}

fn refined(series: &[f64], anchor: usize, window: &[f64], fraction: f64, descending: bool) -> f64 {
    let mut picked = vec![series[anchor]];
    picked.extend(top_k(series, selection_count(fraction, series.len()), descending));
    picked.extend(top_k(window, selection_count(fraction, window.len()), descending));
    picked
        .iter()
        .enumerate()
        .fold(0.0, |m, (k, &v)| m + (v - m) / (k + 1) as f64)
}

/// Refined `(ed_area, es_area)` for one cycle.
pub fn refine_cycle_areas(
    series: &AreaSeries,
    cycle: &CardiacCycle,
    fraction: f64,
) -> Result<(f64, f64), RefineError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(RefineError::InvalidFraction(fraction));
    }
    let x = &series.areas;
    let CardiacCycle { ed_frame: ed, es_frame: es } = *cycle;
    if ed >= es || es >= x.len() {
        return Err(RefineError::InvalidCycle { ed, es, len: x.len() });
    }
    let window = &x[ed..=es];
    Ok((
        refined(x, ed, window, fraction, true),
        refined(x, es, window, fraction, false),
    ))
}

/// The plain percentile estimate: 90th percentile as ED area, 10th as ES.
pub fn percentile_baseline(series: &AreaSeries) -> Result<(f64, f64), RefineError> {
    if series.areas.is_empty() {
        return Err(RefineError::EmptySeries);
    }
    Ok((percentile(&series.areas, 90.0), percentile(&series.areas, 10.0)))
}
