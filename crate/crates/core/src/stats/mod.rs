//! Evaluation statistics: Pearson correlation, R², paired t-test, ROC/AUC,
//! confusion counts and percentile bootstrap intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;


#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("target has zero variance")]
    FlatTarget,
    #[error("paired differences are constant and non-zero")]
    DegenerateDifferences,
    #[error("only one class present")]
    SingleClass,
    #[error("non-finite input")]
    NonFinite,
    #[error("statistic {0:?} does not apply to this sample kind")]
    IncompatibleStatistic(Statistic),
    #[error("bootstrap resample {0} kept drawing a single class")]
    SingleClassResample(usize),
    #[error("bootstrap resample {0} kept drawing a degenerate sample")]
    DegenerateResample(usize),
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom, as `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    statrs::function::beta::beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(StatsError::LengthMismatch(a, b));
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Percentile `p` in `[0, 100]` by linear interpolation between order
/// statistics (position `p/100 · (n-1)`). `values` must be non-empty.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, p)
}

fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        return sorted[lo];
    }
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
}

/// Pearson product-moment correlation with a two-sided p-value from
/// Student's t with `n - 2` degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    same_len(xs.len(), ys.len())?;
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: n });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        student_t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(Correlation { r, p })
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    same_len(y_true.len(), y_pred.len())?;
    let n = y_true.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    let m = mean(y_true);
    let ss_tot: f64 = y_true.iter().map(|y| (y - m).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(StatsError::FlatTarget);
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
}

/// Paired two-sided t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    same_len(a.len(), b.len())?;
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if d.iter().all(|&v| v == 0.0) {
        return Ok(TTest { t: 0.0, p: 1.0 });
    }
    let md = mean(&d);
    let var = d.iter().map(|v| (v - md).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Err(StatsError::DegenerateDifferences);
    }
    let t = md / (var.sqrt() / (n as f64).sqrt());
    Ok(TTest {
        t,
        p: student_t_two_sided(t, (n - 1) as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one point per distinct score.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC curve for `scores` (higher = more positive) against `labels`, and its
/// trapezoid area. Equal scores share one threshold, so the area equals the
/// Mann-Whitney probability with ties credited one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    same_len(scores.len(), labels.len())?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(StatsError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let point = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        let last = points[points.len() - 1];
        auc += (point.0 - last.0) * (point.1 + last.1) / 2.0;
        points.push(point);
    }
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

pub fn confusion_matrix(pred: &[bool], truth: &[bool]) -> Result<ConfusionCounts> {
    same_len(pred.len(), truth.len())?;
    if pred.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    let mut c = ConfusionCounts { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Statistics the bootstrap knows how to recompute on a resample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Pearson,
    Auc,
    Accuracy,
}

/// Data to resample: rows are resampled as units.
#[derive(Debug, Clone, Copy)]
pub enum BootstrapSample<'a> {
    Values(&'a [f64]),
    Pairs(&'a [f64], &'a [f64]),
    Scored { scores: &'a [f64], labels: &'a [bool] },
    Decisions { pred: &'a [bool], truth: &'a [bool] },
}

impl BootstrapSample<'_> {
    pub fn len(&self) -> usize {
        match self {
            Self::Values(v) => v.len(),
            Self::Pairs(x, _) => x.len(),
            Self::Scored { scores, .. } => scores.len(),
            Self::Decisions { pred, .. } => pred.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self) -> Result<()> {
        match self {
            Self::Values(_) => Ok(()),
            Self::Pairs(x, y) => same_len(x.len(), y.len()),
            Self::Scored { scores, labels } => same_len(scores.len(), labels.len()),
            Self::Decisions { pred, truth } => same_len(pred.len(), truth.len()),
        }
    }

    /// The statistic on the rows picked by `idx`.
    pub fn statistic(&self, stat: Statistic, idx: &[usize]) -> Result<f64> {
        fn pick<T: Copy>(v: &[T], idx: &[usize]) -> Vec<T> {
            idx.iter().map(|&i| v[i]).collect()
        }
        match (stat, self) {
            (Statistic::Mean, Self::Values(v)) => Ok(mean(&pick(v, idx))),
            (Statistic::Pearson, Self::Pairs(x, y)) => {
                pearson(&pick(x, idx), &pick(y, idx)).map(|c| c.r)
            }
            (Statistic::Auc, Self::Scored { scores, labels }) => {
                roc_auc(&pick(scores, idx), &pick(labels, idx)).map(|c| c.auc)
            }
            (Statistic::Accuracy, Self::Decisions { pred, truth }) => {
                confusion_matrix(&pick(pred, idx), &pick(truth, idx)).map(|c| c.accuracy())
            }
            (stat, _) => Err(StatsError::IncompatibleStatistic(stat)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Draws allowed per resample before a degenerate resample is an error.
pub const MAX_RESAMPLE_ATTEMPTS: usize = 10;

/// Percentile bootstrap: `n_resamples` resamples with replacement, the
/// statistic on each, and the 2.5th / 97.5th percentiles of those values.
///
/// Resample `r` draws its row indices from `SplitMix64::substream(seed, r)`
/// via [`SplitMix64::below`]. A resample on which the statistic is undefined
/// (one class for AUC, zero variance for Pearson) is redrawn from the same
/// stream, up to [`MAX_RESAMPLE_ATTEMPTS`] draws in total.
pub fn bootstrap_ci(
    sample: &BootstrapSample<'_>,
    stat: Statistic,
    n_resamples: usize,
    seed: u64,
) -> Result<Interval> {
    sample.check()?;
    let n = sample.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    if n_resamples == 0 {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    // surface incompatible statistic / bad data before resampling
    let all: Vec<usize> = (0..n).collect();
    match sample.statistic(stat, &all) {
        Err(e @ StatsError::IncompatibleStatistic(_)) | Err(e @ StatsError::NonFinite) => {
            return Err(e)
        }
        _ => {}
    }

    let mut values = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = SplitMix64::substream(seed, r as u64);
            let mut idx = vec![0usize; n];
            let mut last_err = StatsError::DegenerateResample(r);
            for _ in 0..MAX_RESAMPLE_ATTEMPTS {
                idx.iter_mut().for_each(|i| *i = rng.below(n));
                match sample.statistic(stat, &idx) {
                    Ok(v) => return Ok(v),
                    Err(StatsError::SingleClass) => last_err = StatsError::SingleClassResample(r),
                    Err(StatsError::ZeroVariance) => last_err = StatsError::DegenerateResample(r),
                    Err(e) => return Err(e),
                }
            }
            Err(last_err)
        })
        .collect::<Result<Vec<f64>>>()?;
    values.sort_by(f64::total_cmp);
    Ok(Interval {
        lo: percentile_sorted(&values, 2.5),
        hi: percentile_sorted(&values, 97.5),
    })
}
