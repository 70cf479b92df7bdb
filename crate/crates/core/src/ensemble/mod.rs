//! LV length regression: a uniform vote over Extra Trees, AdaBoost.R2,
//! Lasso and a Ridge/KNN/GBDT stack.

mod adaboost;
mod extra_trees;
mod gbdt;
mod knn;
mod linear;
mod model;
mod nnls;
mod stack;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adaboost::{AdaBoost, AdaBoostConfig};
pub use extra_trees::{ExtraTrees, ExtraTreesConfig};
pub use gbdt::{Gbdt, GbdtConfig};
pub use knn::Knn;
pub use linear::{Lasso, LassoConfig, Ridge, Standardizer};
pub use model::{
    kfold_r2, load_model, model_from_json, model_to_json, save_model, train_base, train_voting_ensemble, vote, BaseKind,
    BaseModel, EnsembleConfig, FoldScores, KFoldReport, LengthModel, MODEL_FORMAT,
    MODEL_VERSION,
};
pub use nnls::nnls;
pub use stack::Stack;
pub use tree::{fit_cart, fit_extra_tree, GrowParams, Node, Tree};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("{features} feature rows but {targets} targets")]
    LengthMismatch { features: usize, targets: usize },
    #[error("non-finite value in sample {0}")]
    NonFiniteInput(usize),
    #[error("negative feature in sample {0}")]
    NegativeFeature(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("ridge design matrix is singular")]
    SingularDesign,
    #[error("model has an untrained member")]
    UntrainedModel,
    #[error("model version {found:?} is not supported (expected {expected:?})")]
    VersionMismatch { found: String, expected: String },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("held-out targets are constant and predictions miss them")]
    FlatTarget,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-frame regressors for the length model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub area: f64,
    pub width: f64,
    pub height: f64,
}

impl FeatureVector {
    pub const fn new(area: f64, width: f64, height: f64) -> Self {
        Self { area, width, height }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.area, self.width, self.height]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_array().to_vec()
    }
}

impl From<&crate::geometry::LvFrameFeatures> for FeatureVector {
    fn from(f: &crate::geometry::LvFrameFeatures) -> Self {
        Self::new(f.area, f.width, f.height)
    }
}

/// Anything that maps frame features to an LV length in pixels.
pub trait LengthPredictor: Sync {
    fn predict_length(&self, features: &FeatureVector) -> Result<f64, EnsembleError>;
}

impl<F> LengthPredictor for F
where
    F: Fn(&FeatureVector) -> f64 + Sync,
{
    fn predict_length(&self, features: &FeatureVector) -> Result<f64, EnsembleError> {
        Ok(self(features))
    }
}

/// Round-robin fold labels over a seeded shuffle: every fold gets
/// `n / k` or `n / k + 1` samples.
pub fn fold_assignment(n: usize, k: usize, rng: &mut crate::rng::SplitMix64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

/// Rows of `x` where `keep(fold[i])` holds, with their targets.
pub(crate) fn select_rows(
    x: &[Vec<f64>],
    y: &[f64],
    fold: &[usize],
    keep: impl Fn(usize) -> bool,
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<usize>) {
    let idx: Vec<usize> = (0..y.len()).filter(|&i| keep(fold[i])).collect();
    (
        idx.iter().map(|&i| x[i].clone()).collect(),
        idx.iter().map(|&i| y[i]).collect(),
        idx,
    )
}
