//! ED/ES detection on the per-frame LV area curve.
//!
//! ED frames are prominent maxima of the area series and ES frames are
//! prominent maxima of the negated series. Prominence uses the topographic
//! definition: the peak height minus the higher of the two lowest points
//! reached on each side before meeting a strictly higher sample (or the end
//! of the series). A peak qualifies when its prominence is at least
//! `prominence_fraction * (max - min)`; surviving peaks are then thinned so
//! no two are closer than `min_distance` frames, keeping the higher one (the
//! earlier one on equal heights). Plateaus are reported at their first frame.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CycleError {
    #[error("no cardiac cycle detected")]
    NoCycles,
    #[error("invalid peak parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaSeries {
    pub video_id: String,
    pub areas: Vec<f64>,
}

impl AreaSeries {
    pub fn new(video_id: impl Into<String>, areas: Vec<f64>) -> Self {
        Self {
            video_id: video_id.into(),
            areas,
        }
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakParams {
    pub min_distance: usize,
    pub prominence_fraction: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        Self {
            min_distance: 20,
            prominence_fraction: 0.5,
        }
    }
}

impl PeakParams {
    pub fn validate(&self) -> Result<(), CycleError> {
        if self.min_distance < 1 {
            return Err(CycleError::InvalidParams("min_distance must be >= 1".into()));
        }
        if !(self.prominence_fraction > 0.0 && self.prominence_fraction < 1.0) {
            return Err(CycleError::InvalidParams(format!(
                "prominence_fraction {} outside (0, 1)",
                self.prominence_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CardiacCycle {
    pub ed_frame: usize,
    pub es_frame: usize,
}

/// Local maxima; a flat top counts once, at its first index. Samples at
/// either end of the series are never maxima.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Topographic prominence of the sample at `peak`.
pub fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut left_min = h;
    for &v in x[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn prominence_threshold(x: &[f64], fraction: f64) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    fraction * (hi - lo)
}

fn select_peaks(x: &[f64], params: &PeakParams) -> Vec<usize> {
    if x.len() < 3 {
        return Vec::new();
    }
    let threshold = prominence_threshold(x, params.prominence_fraction);
    let mut candidates: Vec<usize> = local_maxima(x)
        .into_iter()
        .filter(|&p| prominence(x, p) >= threshold)
        .collect();
    // highest first, earliest on ties
    candidates.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for p in candidates {
        if kept.iter().all(|&k| k.abs_diff(p) >= params.min_distance) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

/// Frame indices of prominent maxima of `series`.
pub fn find_peaks(series: &AreaSeries, params: &PeakParams) -> Vec<usize> {
    select_peaks(&series.areas, params)
}

/// Frame indices of prominent minima of `series` (peaks of the negation).
pub fn find_troughs(series: &AreaSeries, params: &PeakParams) -> Vec<usize> {
    let negated: Vec<f64> = series.areas.iter().map(|&a| -a).collect();
    select_peaks(&negated, params)
}

/// Pairs every ED peak with the smallest-area ES trough strictly between it
/// and the next ED peak (or the end of the series). EDs without a following
/// trough are dropped.
pub fn detect_cycles(
    series: &AreaSeries,
    params: &PeakParams,
) -> Result<Vec<CardiacCycle>, CycleError> {
    params.validate()?;
    let x = &series.areas;
    let eds = find_peaks(series, params);
    let ess = find_troughs(series, params);
    let mut cycles = Vec::new();
    for (i, &ed) in eds.iter().enumerate() {
        let bound = eds.get(i + 1).copied().unwrap_or(x.len());
        let es = ess
            .iter()
            .copied()
            .filter(|&s| s > ed && s < bound)
            .min_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        if let Some(es) = es {
            if x[ed] > x[es] {
                cycles.push(CardiacCycle {
                    ed_frame: ed,
                    es_frame: es,
                });
            }
        }
    }
    if cycles.is_empty() {
        return Err(CycleError::NoCycles);
    }
    Ok(cycles)
}

/// Cycles export: `video_id,cycle_index,ed_frame,es_frame`.
pub fn write_cycles_csv<W: Write>(
    video_id: &str,
    cycles: &[CardiacCycle],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["video_id", "cycle_index", "ed_frame", "es_frame"])?;
    for (i, c) in cycles.iter().enumerate() {
        w.write_record([
            video_id.to_string(),
            i.to_string(),
            c.ed_frame.to_string(),
            c.es_frame.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
