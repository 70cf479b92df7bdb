//! Left-ventricular ejection fraction (LVEF) from per-frame LV segmentation
//! masks or expert tracings.
//!
//! Stages, in pipeline order:
//!
//! 1. [`dataset`]: FileList / VolumeTracings CSV parsing, PGM mask sequences.
//! 2. [`geometry`]: tracing to polygon to mask, per-frame area/width/height.
//! 3. [`cycles`]: ED/ES detection by peak finding on the area curve.
//! 4. [`refine`]: improved Jeffrey's ED/ES area averaging.
//! 5. [`ensemble`]: voting ensemble predicting LV length from frame features.
//! 6. [`pipeline`]: area-length volumes, per-cycle and all-cycle EF, HFrEF.
//! 7. [`stats`]: Pearson, R², paired t-test, ROC/AUC, confusion, bootstrap.
//! 8. [`report`]: beat-to-beat SVG visualizer.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cycles;
pub mod dataset;
pub mod ensemble;
pub mod geometry;
pub mod mask;
pub mod pipeline;
pub mod refine;
pub mod report;
pub mod rng;
pub mod stats;

pub use cycles::{detect_cycles, find_peaks, AreaSeries, CardiacCycle, PeakParams};
pub use dataset::{parse_manifest, parse_tracings, read_mask_sequence, write_mask_sequence};
pub use dataset::{MaskSequence, Split, TraceFrame, VideoRecord};
pub use ensemble::{EnsembleConfig, FeatureVector, LengthModel, LengthPredictor};
pub use geometry::{extract_features, LvFrameFeatures, Point, Polygon};
pub use mask::Mask;
pub use pipeline::{run_pipeline, PipelineConfig, VideoResult, VolumeConstant};
