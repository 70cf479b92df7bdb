//! Python module `lvef`: EF formulas, cycle detection, area refinement,
//! the LV length model, the per-video pipeline and evaluation statistics.

use std::path::PathBuf;

use lvef_core::cycles::{self, AreaSeries, CardiacCycle, PeakParams};
use lvef_core::ensemble::{self, FeatureVector};
use lvef_core::pipeline::{self, EfMode, HfPhenotype, PipelineError, VolumeConstant};
use lvef_core::{refine, stats, EnsembleConfig, Mask, PipelineConfig};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(lvef, NoCyclesError, PyException, "No usable cardiac cycle was found.");

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pipeline_err(e: PipelineError) -> PyErr {
    if e.is_no_cycles() {
        NoCyclesError::new_err(e.to_string())
    } else {
        value_err(e)
    }
}

fn peak_params(min_distance: usize, prominence_fraction: f64) -> PyResult<PeakParams> {
    let p = PeakParams { min_distance, prominence_fraction };
    p.validate().map_err(value_err)?;
    Ok(p)
}

/// Rows of pixels to a mask; every row must have the same width.
pub fn mask_from_rows(rows: &[Vec<bool>]) -> Result<Mask, String> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if height == 0 || width == 0 {
        return Err("mask must be non-empty".into());
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        return Err(format!("row {bad} has {} pixels, expected {width}", rows[bad].len()));
    }
    Ok(Mask::from_fn(width, height, |x, y| rows[y][x]))
}

fn to_py_json<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyfunction]
fn ef_from_area_length(ed_area: f64, ed_length: f64, es_area: f64, es_length: f64) -> PyResult<f64> {
    pipeline::ef_from_area_length(ed_area, ed_length, es_area, es_length).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (area, length, c = None))]
fn volume_area_length(area: f64, length: f64, c: Option<f64>) -> PyResult<f64> {
    let k = match c {
        Some(c) => VolumeConstant::new(c).map_err(value_err)?,
        None => VolumeConstant::default(),
    };
    pipeline::volume_area_length(area, length, k).map_err(value_err)
}

#[pyfunction]
fn ef_all_cycles(per_cycle: Vec<f64>) -> PyResult<f64> {
    pipeline::ef_all_cycles(&per_cycle).map_err(pipeline_err)
}

#[pyfunction]
fn classify_hfref(ef: f64) -> bool {
    pipeline::classify_hfref(ef)
}

/// "HFrEF", "HFmrEF" or "HFpEF".
#[pyfunction]
fn phenotype(ef: f64) -> String {
    HfPhenotype::from_ef(ef).to_string()
}

#[pyfunction]
#[pyo3(signature = (areas, min_distance = 20, prominence_fraction = 0.5))]
fn find_peaks(areas: Vec<f64>, min_distance: usize, prominence_fraction: f64) -> PyResult<Vec<usize>> {
    let p = peak_params(min_distance, prominence_fraction)?;
    Ok(cycles::find_peaks(&AreaSeries::new("", areas), &p))
}

/// `(ed_frame, es_frame)` pairs.
#[pyfunction]
#[pyo3(signature = (areas, min_distance = 20, prominence_fraction = 0.5))]
fn detect_cycles(
    areas: Vec<f64>,
    min_distance: usize,
    prominence_fraction: f64,
) -> PyResult<Vec<(usize, usize)>> {
    let p = peak_params(min_distance, prominence_fraction)?;
    cycles::detect_cycles(&AreaSeries::new("", areas), &p)
        .map(|cs| cs.iter().map(|c| (c.ed_frame, c.es_frame)).collect())
        .map_err(|e| pipeline_err(e.into()))
}

/// Refined `(ed_area, es_area)` of one cycle.
#[pyfunction]
#[pyo3(signature = (areas, ed_frame, es_frame, fraction = 0.1))]
fn refine_cycle_areas(areas: Vec<f64>, ed_frame: usize, es_frame: usize, fraction: f64) -> PyResult<(f64, f64)> {
    let cycle = CardiacCycle { ed_frame, es_frame };
    refine::refine_cycle_areas(&AreaSeries::new("", areas), &cycle, fraction).map_err(value_err)
}

/// `{"area", "width", "height"}` of a mask given as rows of pixels; any
/// non-zero pixel is foreground.
#[pyfunction]
fn extract_features<'py>(py: Python<'py>, mask: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let rows: Vec<Vec<bool>> = mask.iter().map(|r| r.iter().map(|&v| v != 0.0).collect()).collect();
    let f = lvef_core::extract_features(&mask_from_rows(&rows).map_err(value_err)?, 0);
    let d = PyDict::new(py);
    d.set_item("area", f.area)?;
    d.set_item("width", f.width)?;
    d.set_item("height", f.height)?;
    Ok(d)
}

/// `(r, p)`.
#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    stats::pearson(&x, &y).map(|c| (c.r, c.p)).map_err(value_err)
}

/// `(t, p)` of the paired test on `a - b`.
#[pyfunction]
fn paired_t_test(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    stats::paired_t_test(&a, &b).map(|t| (t.t, t.p)).map_err(value_err)
}

#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    stats::roc_auc(&scores, &labels).map(|r| r.auc).map_err(value_err)
}

/// Percentile bootstrap interval `(lo, hi)` of the mean.
#[pyfunction]
#[pyo3(signature = (values, n_resamples = 100, seed = 42))]
fn bootstrap_mean_ci(values: Vec<f64>, n_resamples: usize, seed: u64) -> PyResult<(f64, f64)> {
    stats::bootstrap_ci(&stats::BootstrapSample::Values(&values), stats::Statistic::Mean, n_resamples, seed)
        .map(|ci| (ci.lo, ci.hi))
        .map_err(value_err)
}

fn feature_vectors(features: &[(f64, f64, f64)]) -> Vec<FeatureVector> {
    features.iter().map(|&(a, w, h)| FeatureVector::new(a, w, h)).collect()
}

/// The voting ensemble that predicts LV length from `(area, width, height)`.
#[pyclass(frozen, module = "lvef")]
struct LengthModel {
    inner: ensemble::LengthModel,
}

#[pymethods]
impl LengthModel {
    #[staticmethod]
    #[pyo3(signature = (features, lengths, seed = 42, k_folds = 5))]
    fn train(py: Python<'_>, features: Vec<(f64, f64, f64)>, lengths: Vec<f64>, seed: u64, k_folds: usize) -> PyResult<Self> {
        let config = EnsembleConfig { seed, k_folds, ..Default::default() };
        let x = feature_vectors(&features);
        py.detach(|| ensemble::train_voting_ensemble(&x, &lengths, &config))
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ensemble::load_model(path).map(|inner| Self { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ensemble::model_from_json(text).map(|inner| Self { inner }).map_err(value_err)
    }

    fn to_json(&self) -> String {
        ensemble::model_to_json(&self.inner)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        ensemble::save_model(&self.inner, path).map_err(value_err)
    }

    fn predict(&self, area: f64, width: f64, height: f64) -> PyResult<f64> {
        self.inner
            .predict(&FeatureVector::new(area, width, height))
            .map_err(value_err)
    }

    /// Extra trees, AdaBoost, Lasso and stack predictions.
    fn member_predictions(&self, area: f64, width: f64, height: f64) -> PyResult<[f64; 4]> {
        self.inner
            .member_predictions(&FeatureVector::new(area, width, height))
            .map_err(value_err)
    }
}

/// Per-fold held-out R² as a dict `{"folds": [...], "mean": {...}}`.
#[pyfunction]
#[pyo3(signature = (features, lengths, k = 5, seed = 42))]
fn kfold_r2<'py>(py: Python<'py>, features: Vec<(f64, f64, f64)>, lengths: Vec<f64>, k: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let config = EnsembleConfig { seed, k_folds: k, ..Default::default() };
    let x = feature_vectors(&features);
    let report = py.detach(|| ensemble::kfold_r2(&x, &lengths, &config)).map_err(value_err)?;
    to_py_json(py, &report)
}

/// Runs the pipeline on a directory of `frame_NNNNN.pgm` masks and returns
/// the video result as a dict.
#[pyfunction]
#[pyo3(signature = (
    mask_dir,
    model,
    jeffrey_fraction = 0.1,
    min_distance = 20,
    prominence_fraction = 0.5,
    volume_constant = None,
    single_cycle = false,
))]
#[allow(clippy::too_many_arguments)]
fn predict_video<'py>(
    py: Python<'py>,
    mask_dir: PathBuf,
    model: &LengthModel,
    jeffrey_fraction: f64,
    min_distance: usize,
    prominence_fraction: f64,
    volume_constant: Option<f64>,
    single_cycle: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let config = PipelineConfig {
        peaks: peak_params(min_distance, prominence_fraction)?,
        jeffrey_fraction,
        volume_constant: match volume_constant {
            Some(c) => VolumeConstant::new(c).map_err(value_err)?,
            None => VolumeConstant::default(),
        },
        ef_mode: if single_cycle { EfMode::SingleCycle } else { EfMode::AllCycles },
        ..Default::default()
    };
    let masks = lvef_core::read_mask_sequence(&mask_dir).map_err(value_err)?;
    let result = py
        .detach(|| lvef_core::run_pipeline(&masks, &model.inner, &config))
        .map_err(pipeline_err)?;
    to_py_json(py, &result)
}

#[pymodule]
pub fn lvef(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NoCyclesError", m.py().get_type::<NoCyclesError>())?;
    m.add("AREA_LENGTH_CONSTANT", VolumeConstant::AREA_LENGTH.value())?;
    m.add("HFREF_THRESHOLD", pipeline::HFREF_THRESHOLD)?;
    m.add_class::<LengthModel>()?;
    m.add_function(wrap_pyfunction!(ef_from_area_length, m)?)?;
    m.add_function(wrap_pyfunction!(volume_area_length, m)?)?;
    m.add_function(wrap_pyfunction!(ef_all_cycles, m)?)?;
    m.add_function(wrap_pyfunction!(classify_hfref, m)?)?;
    m.add_function(wrap_pyfunction!(phenotype, m)?)?;
    m.add_function(wrap_pyfunction!(find_peaks, m)?)?;
    m.add_function(wrap_pyfunction!(detect_cycles, m)?)?;
    m.add_function(wrap_pyfunction!(refine_cycle_areas, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_mean_ci, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_r2, m)?)?;
    m.add_function(wrap_pyfunction!(predict_video, m)?)?;
    Ok(())
}
