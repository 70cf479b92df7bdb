//! Area-length volumes, per-cycle and all-cycle EF, HFrEF classification
//! and the per-video driver.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{detect_cycles, AreaSeries, CardiacCycle, CycleError, PeakParams};
use crate::dataset::MaskSequence;
use crate::ensemble::{EnsembleError, FeatureVector, LengthPredictor};
use crate::geometry::{extract_features, LvFrameFeatures};
use crate::refine::{percentile_baseline, refine_cycle_areas, RefineError, DEFAULT_FRACTION};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no cardiac cycle detected")]
    NoCycles,
    #[error("no cycle passed acceptance ({rejected} rejected)")]
    NoAcceptedCycles { rejected: usize },
    #[error("LV length must be positive, got {0}")]
    ZeroLength(f64),
    #[error("end-diastolic volume must be positive, got {0}")]
    NonPositiveEdv(f64),
    #[error("empty mask sequence")]
    EmptySequence,
    #[error("volume constant must be positive and finite, got {0}")]
    InvalidVolumeConstant(f64),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Length(#[from] EnsembleError),
}

impl PipelineError {
    /// True for every way a video can end up without a usable cycle.
    pub fn is_no_cycles(&self) -> bool {
        matches!(
            self,
            Self::NoCycles | Self::NoAcceptedCycles { .. } | Self::Cycle(CycleError::NoCycles)
        )
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Multiplier `c` in `V = c · A² / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VolumeConstant(f64);

impl VolumeConstant {
    /// The usual single-plane ellipsoid constant `8 / (3π)`.
    pub const AREA_LENGTH: Self = Self(8.0 / (3.0 * PI));
    /// `8π / 3`.
    pub const ALTERNATE: Self = Self(8.0 * PI / 3.0);

    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && c.is_finite() {
            Ok(Self(c))
        } else {
            Err(PipelineError::InvalidVolumeConstant(c))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for VolumeConstant {
    fn default() -> Self {
        Self::AREA_LENGTH
    }
}

pub fn volume_area_length(area: f64, length: f64, k: VolumeConstant) -> Result<f64> {
    if !(length > 0.0) {
        return Err(PipelineError::ZeroLength(length));
    }
    Ok(k.0 * area * area / length)
}

pub fn ef_from_volumes(edv: f64, esv: f64) -> Result<f64> {
    if !(edv > 0.0) {
        return Err(PipelineError::NonPositiveEdv(edv));
    }
    Ok(100.0 * (edv - esv) / edv)
}

/// EF straight from areas and lengths. The volume constant cancels, so it
/// is left out entirely and the result does not depend on it.
pub fn ef_from_area_length(ed_area: f64, ed_length: f64, es_area: f64, es_length: f64) -> Result<f64> {
    for l in [ed_length, es_length] {
        if !(l > 0.0) {
            return Err(PipelineError::ZeroLength(l));
        }
    }
    let ed = ed_area * ed_area / ed_length;
    let es = es_area * es_area / es_length;
    ef_from_volumes(ed, es)
}

pub fn ef_all_cycles(per_cycle: &[f64]) -> Result<f64> {
    if per_cycle.is_empty() {
        return Err(PipelineError::NoCycles);
    }
    let mean = per_cycle
        .iter()
        .enumerate()
        .fold(0.0, |m, (k, &ef)| m + (ef - m) / (k + 1) as f64);
    Ok(mean)
}

pub const HFREF_THRESHOLD: f64 = 40.0;

pub fn classify_hfref(ef: f64) -> bool {
    ef < HFREF_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HfPhenotype {
    #[serde(rename = "HFrEF")]
    Reduced,
    #[serde(rename = "HFmrEF")]
    MildlyReduced,
    #[serde(rename = "HFpEF")]
    Preserved,
}

impl HfPhenotype {
    pub fn from_ef(ef: f64) -> Self {
        if ef < HFREF_THRESHOLD {
            Self::Reduced
        } else if ef < 50.0 {
            Self::MildlyReduced
        } else {
            Self::Preserved
        }
    }
}

impl fmt::Display for HfPhenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Reduced => "HFrEF",
            Self::MildlyReduced => "HFmrEF",
            Self::Preserved => "HFpEF",
        })
    }
}

/// Which EF the result reports as its headline value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfMode {
    #[default]
    AllCycles,
    SingleCycle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub peaks: PeakParams,
    pub jeffrey_fraction: f64,
    /// `false` uses the raw areas at the detected ED/ES frames.
    pub refine: bool,
    pub volume_constant: VolumeConstant,
    pub ef_mode: EfMode,
    /// Fall back to the 90th/10th percentile areas when no cycle is found.
    pub percentile_fallback: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            peaks: PeakParams::default(),
            jeffrey_fraction: DEFAULT_FRACTION,
            refine: true,
            volume_constant: VolumeConstant::default(),
            ef_mode: EfMode::AllCycles,
            percentile_fallback: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleVolumes {
    #[serde(flatten)]
    pub cycle: CardiacCycle,
    pub ed_area: f64,
    pub es_area: f64,
    pub ed_length: f64,
    pub es_length: f64,
    pub edv: f64,
    pub esv: f64,
    pub ef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Flag {
    RejectedCycle {
        ed_frame: usize,
        es_frame: usize,
        ef: f64,
        reason: String,
    },
    PercentileFallback {
        ed_area: f64,
        es_area: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoResult {
    pub video_id: String,
    /// Accepted cycles only; rejected ones are listed in `flags`.
    pub cycles: Vec<CycleVolumes>,
    pub ef_all_cycles: f64,
    pub ef_first_cycle: f64,
    pub ef_second_cycle: Option<f64>,
    pub ef_mode: EfMode,
    /// The headline EF selected by `ef_mode`.
    pub ef: f64,
    pub hfref: bool,
    pub phenotype: HfPhenotype,
    pub flags: Vec<Flag>,
}

fn feature_vector(f: &LvFrameFeatures) -> FeatureVector {
    FeatureVector::from(f)
}

fn cycle_volumes<P: LengthPredictor + ?Sized>(
    cycle: CardiacCycle,
    ed_area: f64,
    es_area: f64,
    frames: &[LvFrameFeatures],
    predictor: &P,
    k: VolumeConstant,
) -> Result<CycleVolumes> {
    let ed_length = predictor.predict_length(&feature_vector(&frames[cycle.ed_frame]))?;
    let es_length = predictor.predict_length(&feature_vector(&frames[cycle.es_frame]))?;
    let ef = ef_from_area_length(ed_area, ed_length, es_area, es_length)?;
    Ok(CycleVolumes {
        cycle,
        ed_area,
        es_area,
        ed_length,
        es_length,
        edv: volume_area_length(ed_area, ed_length, k)?,
        esv: volume_area_length(es_area, es_length, k)?,
        ef,
    })
}

fn acceptance(ef: f64) -> Option<&'static str> {
    if !ef.is_finite() {
        Some("non-finite EF")
    } else if ef <= 0.0 {
        Some("EF not positive (ESV >= EDV)")
    } else if ef >= 100.0 {
        Some("EF at or above 100")
    } else {
        None
    }
}

fn arg_extreme(areas: &[f64], largest: bool) -> usize {
    let mut best = 0;
    for (i, a) in areas.iter().enumerate() {
        let better = if largest { *a > areas[best] } else { *a < areas[best] };
        if better {
            best = i;
        }
    }
    best
}

/// Cycle detection, refinement, volumes and EF over precomputed per-frame
/// features (frame `i` of the video at position `i`).
pub fn analyze_features<P: LengthPredictor + ?Sized>(
    video_id: &str,
    frames: &[LvFrameFeatures],
    predictor: &P,
    config: &PipelineConfig,
) -> Result<VideoResult> {
    if frames.is_empty() {
        return Err(PipelineError::EmptySequence);
    }
    let series = AreaSeries::new(video_id, frames.iter().map(|f| f.area).collect());
    let mut flags = Vec::new();
    let mut accepted = Vec::new();

    match detect_cycles(&series, &config.peaks) {
        Ok(cycles) => {
            for cycle in cycles {
                let (ed_area, es_area) = if config.refine {
                    refine_cycle_areas(&series, &cycle, config.jeffrey_fraction)?
                } else {
                    (series.areas[cycle.ed_frame], series.areas[cycle.es_frame])
                };
                let cv = cycle_volumes(cycle, ed_area, es_area, frames, predictor, config.volume_constant)?;
                match acceptance(cv.ef) {
                    None => accepted.push(cv),
                    Some(reason) => flags.push(Flag::RejectedCycle {
                        ed_frame: cycle.ed_frame,
                        es_frame: cycle.es_frame,
                        ef: cv.ef,
                        reason: reason.to_string(),
                    }),
                }
            }
        }
        Err(CycleError::NoCycles) if config.percentile_fallback => {
            let (ed_area, es_area) = percentile_baseline(&series)?;
            let cycle = CardiacCycle {
                ed_frame: arg_extreme(&series.areas, true),
                es_frame: arg_extreme(&series.areas, false),
            };
            flags.push(Flag::PercentileFallback { ed_area, es_area });
            let cv = cycle_volumes(cycle, ed_area, es_area, frames, predictor, config.volume_constant)?;
            if acceptance(cv.ef).is_none() {
                accepted.push(cv);
            }
        }
        Err(e) => return Err(e.into()),
    }

    if accepted.is_empty() {
        return Err(PipelineError::NoAcceptedCycles {
            rejected: flags.len(),
        });
    }
    let efs: Vec<f64> = accepted.iter().map(|c| c.ef).collect();
    let ef_all = ef_all_cycles(&efs)?;
    let ef_first = efs[0];
    let ef = match config.ef_mode {
        EfMode::AllCycles => ef_all,
        EfMode::SingleCycle => ef_first,
    };
    Ok(VideoResult {
        video_id: video_id.to_string(),
        cycles: accepted,
        ef_all_cycles: ef_all,
        ef_first_cycle: ef_first,
        ef_second_cycle: efs.get(1).copied(),
        ef_mode: config.ef_mode,
        ef,
        hfref: classify_hfref(ef),
        phenotype: HfPhenotype::from_ef(ef),
        flags,
    })
}

/// Per-frame features of a mask sequence, extracted in parallel.
pub fn sequence_features(masks: &MaskSequence) -> Vec<LvFrameFeatures> {
    masks
        .frames()
        .par_iter()
        .enumerate()
        .map(|(i, m)| extract_features(m, i))
        .collect()
}

pub fn run_pipeline<P: LengthPredictor + ?Sized>(
    masks: &MaskSequence,
    predictor: &P,
    config: &PipelineConfig,
) -> Result<VideoResult> {
    if masks.is_empty() {
        return Err(PipelineError::EmptySequence);
    }
    analyze_features(&masks.video_id, &sequence_features(masks), predictor, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_examples() {
        let v = volume_area_length(100.0, 10.0, VolumeConstant::default()).unwrap();
        assert!((v - 848.826).abs() < 1e-3, "{v}");
        assert_eq!(volume_area_length(0.0, 10.0, VolumeConstant::default()).unwrap(), 0.0);
        let c = VolumeConstant::new(2.0).unwrap();
        let c2 = VolumeConstant::new(4.0).unwrap();
        assert_eq!(
            volume_area_length(37.0, 3.0, c2).unwrap(),
            2.0 * volume_area_length(37.0, 3.0, c).unwrap()
        );
        assert!(matches!(
            volume_area_length(1.0, 0.0, c),
            Err(PipelineError::ZeroLength(_))
        ));
        assert!(VolumeConstant::new(0.0).is_err());
    }

    #[test]
    fn ef_examples() {
        assert_eq!(ef_from_volumes(100.0, 40.0).unwrap(), 60.0);
        assert_eq!(ef_from_volumes(70.0, 70.0).unwrap(), 0.0);
        assert!(ef_from_volumes(50.0, 60.0).unwrap() < 0.0);
        assert!(matches!(ef_from_volumes(0.0, 1.0), Err(PipelineError::NonPositiveEdv(_))));
    }

    #[test]
    fn all_cycle_means() {
        let a = ef_all_cycles(&[53.68, 51.28, 45.30]).unwrap();
        assert!((a - 50.09).abs() <= 0.01, "{a}");
        let b = ef_all_cycles(&[60.53, 62.86, 63.50]).unwrap();
        assert!((b - 62.30).abs() <= 0.01, "{b}");
        assert_eq!(ef_all_cycles(&[41.5]).unwrap(), 41.5);
        assert!(matches!(ef_all_cycles(&[]), Err(PipelineError::NoCycles)));
    }

    #[test]
    fn hfref_threshold() {
        assert!(classify_hfref(39.99));
        assert!(!classify_hfref(40.0));
        assert!(!classify_hfref(55.0));
        assert_eq!(HfPhenotype::from_ef(45.0), HfPhenotype::MildlyReduced);
        assert_eq!(HfPhenotype::from_ef(50.0), HfPhenotype::Preserved);
        assert_eq!(HfPhenotype::from_ef(12.0).to_string(), "HFrEF");
    }

    fn frames(areas: &[f64]) -> Vec<LvFrameFeatures> {
        areas
            .iter()
            .enumerate()
            .map(|(i, &a)| LvFrameFeatures {
                frame_index: i,
                area: a,
                width: a.sqrt(),
                height: a.sqrt(),
            })
            .collect()
    }

    #[test]
    fn identical_frames_have_no_cycles() {
        let f = frames(&[400.0; 60]);
        let law = |f: &FeatureVector| 2.0 * f.height;
        let err = analyze_features("v", &f, &law, &PipelineConfig::default()).unwrap_err();
        assert!(err.is_no_cycles());
    }

    #[test]
    fn fallback_on_flat_series() {
        let f = frames(&[400.0; 60]);
        let law = |f: &FeatureVector| 2.0 * f.height;
        let cfg = PipelineConfig {
            percentile_fallback: true,
            ..Default::default()
        };
        // constant areas give EF 0, which is rejected even with the fallback
        assert!(analyze_features("v", &f, &law, &cfg).unwrap_err().is_no_cycles());
    }

    #[test]
    fn single_and_all_cycle_share_cycles() {
        let areas: Vec<f64> = (0..130)
            .map(|t| 600.0 + 200.0 * (2.0 * PI * (t as f64 - 10.0) / 40.0).cos())
            .collect();
        let f = frames(&areas);
        let law = |f: &FeatureVector| 2.0 * f.height;
        let all = analyze_features("v", &f, &law, &PipelineConfig::default()).unwrap();
        let single_cfg = PipelineConfig {
            ef_mode: EfMode::SingleCycle,
            ..Default::default()
        };
        let single = analyze_features("v", &f, &law, &single_cfg).unwrap();
        assert_eq!(all.cycles, single.cycles);
        assert_eq!(single.ef, single.ef_first_cycle);
        assert_eq!(all.ef, all.ef_all_cycles);
        assert!(all.cycles.len() >= 2);
        for c in &all.cycles {
            assert!(c.edv > c.esv);
        }
    }
}
