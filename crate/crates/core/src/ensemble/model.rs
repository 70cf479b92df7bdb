//! Ensemble configuration, training, voting, persistence and k-fold R².

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adaboost::{AdaBoost, AdaBoostConfig};
use super::extra_trees::{ExtraTrees, ExtraTreesConfig};
use super::gbdt::{Gbdt, GbdtConfig};
use super::knn::Knn;
use super::linear::{Lasso, LassoConfig, Ridge, Standardizer};
use super::stack::{Stack, StackParams};
use super::{fold_assignment, select_rows, EnsembleError, FeatureVector, LengthPredictor};
use crate::rng::SplitMix64;

pub const MODEL_FORMAT: &str = "lvef-length-model";
pub const MODEL_VERSION: &str = "1";
pub const MIN_TRAINING_SAMPLES: usize = 10;

// independent random streams per member, all derived from the config seed
const SALT_EXTRA_TREES: u64 = 1;
const SALT_ADABOOST: u64 = 2;
const SALT_LASSO_CV: u64 = 3;
const SALT_STACK_FOLDS: u64 = 4;
const SALT_GBDT: u64 = 5;
const SALT_KFOLD: u64 = 6;

fn derived_seed(seed: u64, salt: u64) -> u64 {
    SplitMix64::substream(seed, salt).next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub extra_trees: ExtraTreesConfig,
    pub adaboost: AdaBoostConfig,
    pub lasso: LassoConfig,
    pub gbdt: GbdtConfig,
    pub ridge_lambda: f64,
    pub knn_k: usize,
    pub k_folds: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            extra_trees: ExtraTreesConfig::default(),
            adaboost: AdaBoostConfig::default(),
            lasso: LassoConfig::default(),
            gbdt: GbdtConfig::default(),
            ridge_lambda: 1.0,
            knn_k: 5,
            k_folds: 5,
            seed: 42,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |msg: &str| Err(EnsembleError::InvalidConfig(msg.to_string()));
        let counts = [
            ("extra_trees.n_trees", self.extra_trees.n_trees),
            ("adaboost.n_rounds", self.adaboost.n_rounds),
            ("adaboost.max_depth", self.adaboost.max_depth),
            ("gbdt.n_rounds", self.gbdt.n_rounds),
            ("gbdt.max_depth", self.gbdt.max_depth),
            ("knn_k", self.knn_k),
            ("lasso.max_sweeps", self.lasso.max_sweeps),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return bad(&format!("{name} must be at least 1"));
        }
        if self.k_folds < 2 {
            return bad("k_folds must be at least 2");
        }
        if self.extra_trees.max_depth == Some(0) {
            return bad("extra_trees.max_depth must be at least 1");
        }
        for (name, lr) in [
            ("adaboost.learning_rate", self.adaboost.learning_rate),
            ("gbdt.learning_rate", self.gbdt.learning_rate),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.gbdt.subsample > 0.0 && self.gbdt.subsample <= 1.0) {
            return bad("gbdt.subsample must lie in (0, 1]");
        }
        let lambdas = std::iter::once(self.ridge_lambda)
            .chain(self.lasso.lambda)
            .chain(self.lasso.grid.iter().copied());
        for l in lambdas {
            if !(l >= 0.0 && l.is_finite()) {
                return bad("penalties must be finite and non-negative");
            }
        }
        if self.lasso.lambda.is_none() && self.lasso.grid.is_empty() {
            return bad("lasso needs a fixed lambda or a non-empty grid");
        }
        if !(self.lasso.tol > 0.0) {
            return bad("lasso.tol must be positive");
        }
        Ok(())
    }
}

fn check_training_data(
    features: &[FeatureVector],
    lengths: &[f64],
    needed: usize,
) -> Result<(), EnsembleError> {
    if features.len() != lengths.len() {
        return Err(EnsembleError::LengthMismatch {
            features: features.len(),
            targets: lengths.len(),
        });
    }
    if features.len() < needed {
        return Err(EnsembleError::InsufficientData {
            needed,
            got: features.len(),
        });
    }
    for (i, (f, y)) in features.iter().zip(lengths).enumerate() {
        let a = f.as_array();
        if !y.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(EnsembleError::NonFiniteInput(i));
        }
        if a.iter().any(|v| *v < 0.0) {
            return Err(EnsembleError::NegativeFeature(i));
        }
    }
    Ok(())
}

fn rows(features: &[FeatureVector]) -> Vec<Vec<f64>> {
    features.iter().map(FeatureVector::to_vec).collect()
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Lasso penalty from the grid with the lowest k-fold validation MSE;
/// ties keep the earlier grid value.
fn select_lasso_lambda(x: &[Vec<f64>], y: &[f64], config: &EnsembleConfig) -> f64 {
    let lc = &config.lasso;
    if let Some(l) = lc.lambda {
        return l;
    }
    let k = config.k_folds.min(y.len());
    let fold = fold_assignment(
        y.len(),
        k,
        &mut SplitMix64::new(derived_seed(config.seed, SALT_LASSO_CV)),
    );
    let scores: Vec<f64> = lc
        .grid
        .par_iter()
        .map(|&lambda| {
            (0..k)
                .map(|f| {
                    let (xt, yt, _) = select_rows(x, y, &fold, |g| g != f);
                    let (xh, yh, _) = select_rows(x, y, &fold, |g| g == f);
                    let s = Standardizer::fit(&xt);
                    let m = Lasso::fit(&s.transform(&xt), &yt, lambda, lc.tol, lc.max_sweeps);
                    let pred: Vec<f64> = xh.iter().map(|r| m.predict(&s.transform_row(r))).collect();
                    mse(&pred, &yh)
                })
                .sum::<f64>()
        })
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    lc.grid[best]
}

/// The regressors available to [`train_base`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    ExtraTrees,
    AdaBoost,
    Lasso,
    Ridge,
    Knn,
    Gbdt,
}

/// A single trained regressor; linear and KNN members carry their own
/// standardizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseModel {
    ExtraTrees(ExtraTrees),
    AdaBoost(AdaBoost),
    Lasso { standardizer: Standardizer, model: Lasso },
    Ridge { standardizer: Standardizer, model: Ridge },
    Knn { standardizer: Standardizer, model: Knn },
    Gbdt(Gbdt),
}

impl BaseModel {
    pub fn predict(&self, f: &FeatureVector) -> f64 {
        let x = f.as_array();
        match self {
            Self::ExtraTrees(m) => m.predict(&x),
            Self::AdaBoost(m) => m.predict(&x),
            Self::Lasso { standardizer, model } => model.predict(&standardizer.transform_row(&x)),
            Self::Ridge { standardizer, model } => model.predict(&standardizer.transform_row(&x)),
            Self::Knn { standardizer, model } => model.predict(&standardizer.transform_row(&x)),
            Self::Gbdt(m) => m.predict(&x),
        }
    }
}

pub fn train_base(
    kind: BaseKind,
    features: &[FeatureVector],
    lengths: &[f64],
    config: &EnsembleConfig,
) -> Result<BaseModel, EnsembleError> {
    config.validate()?;
    check_training_data(features, lengths, MIN_TRAINING_SAMPLES)?;
    let x = rows(features);
    let y = lengths;
    let standardizer = || Standardizer::fit(&x);
    Ok(match kind {
        BaseKind::ExtraTrees => BaseModel::ExtraTrees(ExtraTrees::fit(
            &x,
            y,
            &config.extra_trees,
            derived_seed(config.seed, SALT_EXTRA_TREES),
        )),
        BaseKind::AdaBoost => BaseModel::AdaBoost(AdaBoost::fit(
            &x,
            y,
            &config.adaboost,
            &mut SplitMix64::new(derived_seed(config.seed, SALT_ADABOOST)),
        )),
        BaseKind::Lasso => {
            let s = standardizer();
            let lambda = select_lasso_lambda(&x, y, config);
            let model = Lasso::fit(&s.transform(&x), y, lambda, config.lasso.tol, config.lasso.max_sweeps);
            BaseModel::Lasso { standardizer: s, model }
        }
        BaseKind::Ridge => {
            let s = standardizer();
            let model = Ridge::fit(&s.transform(&x), y, config.ridge_lambda)?;
            BaseModel::Ridge { standardizer: s, model }
        }
        BaseKind::Knn => {
            let s = standardizer();
            let model = Knn::fit(&s.transform(&x), y, config.knn_k);
            BaseModel::Knn { standardizer: s, model }
        }
        BaseKind::Gbdt => BaseModel::Gbdt(Gbdt::fit(
            &x,
            y,
            &config.gbdt,
            &mut SplitMix64::new(derived_seed(config.seed, SALT_GBDT)),
        )),
    })
}

/// The trained voting ensemble, serialized as a versioned JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthModel {
    pub format: String,
    pub version: String,
    /// Shared z-score transform for Lasso, Ridge and KNN.
    pub standardizer: Standardizer,
    pub extra_trees: ExtraTrees,
    pub adaboost: AdaBoost,
    pub lasso: Lasso,
    pub stack: Stack,
}

/// Unweighted mean of the member predictions.
pub fn vote(predictions: &[f64; 4]) -> f64 {
    predictions.iter().sum::<f64>() / 4.0
}

impl LengthModel {
    pub fn is_trained(&self) -> bool {
        let p = self.standardizer.mean.len();
        !self.extra_trees.trees.is_empty()
            && !self.adaboost.trees.is_empty()
            && self.adaboost.trees.len() == self.adaboost.weights.len()
            && !self.stack.gbdt.trees.is_empty()
            && !self.stack.knn.targets.is_empty()
            && p == 3
            && self.lasso.coef.len() == p
            && self.stack.ridge.coef.len() == p
    }

    /// (Extra Trees, AdaBoost, Lasso, stack) predictions.
    pub fn member_predictions(&self, f: &FeatureVector) -> Result<[f64; 4], EnsembleError> {
        if !self.is_trained() {
            return Err(EnsembleError::UntrainedModel);
        }
        let x = f.as_array();
        let z = self.standardizer.transform_row(&x);
        Ok([
            self.extra_trees.predict(&x),
            self.adaboost.predict(&x),
            self.lasso.predict(&z),
            self.stack.predict(&x, &z),
        ])
    }

    pub fn predict(&self, f: &FeatureVector) -> Result<f64, EnsembleError> {
        self.member_predictions(f).map(|p| vote(&p))
    }

    fn validate_structure(&self) -> Result<(), EnsembleError> {
        let corrupt = |m: &str| Err(EnsembleError::CorruptModel(m.to_string()));
        if !self.standardizer.is_valid() || self.standardizer.mean.len() != 3 {
            return corrupt("invalid standardizer");
        }
        let trees = self
            .extra_trees
            .trees
            .iter()
            .chain(&self.adaboost.trees)
            .chain(&self.stack.gbdt.trees);
        for t in trees {
            if !t.is_well_formed(3) {
                return corrupt("malformed tree");
            }
        }
        let knn = &self.stack.knn;
        if knn.points.len() != knn.targets.len() || knn.points.iter().any(|p| p.len() != 3) {
            return corrupt("malformed knn member");
        }
        if knn.k == 0 || knn.k > knn.points.len().max(1) {
            return corrupt("knn k out of range");
        }
        if self.stack.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return corrupt("stack weights must be finite and non-negative");
        }
        Ok(())
    }
}

impl LengthPredictor for LengthModel {
    fn predict_length(&self, features: &FeatureVector) -> Result<f64, EnsembleError> {
        self.predict(features)
    }
}

pub fn train_voting_ensemble(
    features: &[FeatureVector],
    lengths: &[f64],
    config: &EnsembleConfig,
) -> Result<LengthModel, EnsembleError> {
    config.validate()?;
    check_training_data(features, lengths, MIN_TRAINING_SAMPLES)?;
    let x = rows(features);
    let y = lengths;
    let standardizer = Standardizer::fit(&x);
    let z = standardizer.transform(&x);

    let ((extra_trees, adaboost), (lasso, stack)) = rayon::join(
        || {
            rayon::join(
                || {
                    ExtraTrees::fit(
                        &x,
                        y,
                        &config.extra_trees,
                        derived_seed(config.seed, SALT_EXTRA_TREES),
                    )
                },
                || {
                    AdaBoost::fit(
                        &x,
                        y,
                        &config.adaboost,
                        &mut SplitMix64::new(derived_seed(config.seed, SALT_ADABOOST)),
                    )
                },
            )
        },
        || {
            rayon::join(
                || {
                    let lambda = select_lasso_lambda(&x, y, config);
                    Lasso::fit(&z, y, lambda, config.lasso.tol, config.lasso.max_sweeps)
                },
                || {
                    Stack::fit(
                        &x,
                        &standardizer,
                        y,
                        &StackParams {
                            ridge_lambda: config.ridge_lambda,
                            knn_k: config.knn_k,
                            gbdt: &config.gbdt,
                            k_folds: config.k_folds,
                            fold_seed: derived_seed(config.seed, SALT_STACK_FOLDS),
                            gbdt_seed: derived_seed(config.seed, SALT_GBDT),
                        },
                    )
                },
            )
        },
    );

    Ok(LengthModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION.to_string(),
        standardizer,
        extra_trees,
        adaboost,
        lasso,
        stack: stack?,
    })
}

pub fn model_to_json(model: &LengthModel) -> String {
    serde_json::to_string(model).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<LengthModel, EnsembleError> {
    let corrupt = |e: serde_json::Error| EnsembleError::CorruptModel(e.to_string());
    // unpruned trees nest deeper than the parser's default limit
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let value = serde_json::Value::deserialize(&mut de).map_err(corrupt)?;
    de.end().map_err(corrupt)?;
    let format = value.get("format").and_then(|v| v.as_str());
    if format != Some(MODEL_FORMAT) {
        return Err(EnsembleError::CorruptModel(format!(
            "format tag {format:?} is not {MODEL_FORMAT:?}"
        )));
    }
    match value.get("version").and_then(|v| v.as_str()) {
        Some(MODEL_VERSION) => {}
        Some(other) => {
            return Err(EnsembleError::VersionMismatch {
                found: other.to_string(),
                expected: MODEL_VERSION.to_string(),
            })
        }
        None => return Err(EnsembleError::CorruptModel("missing version".into())),
    }
    let model: LengthModel = serde_json::from_value(value).map_err(corrupt)?;
    model.validate_structure()?;
    Ok(model)
}

pub fn save_model(model: &LengthModel, path: impl AsRef<Path>) -> Result<(), EnsembleError> {
    fs::write(path, model_to_json(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LengthModel, EnsembleError> {
    model_from_json(&fs::read_to_string(path)?)
}

/// Held-out R² of one fold for the ensemble and each member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub ensemble: f64,
    pub extra_trees: f64,
    pub adaboost: f64,
    pub lasso: f64,
    pub stack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFoldReport {
    pub folds: Vec<FoldScores>,
    pub mean: FoldScores,
}

/// R² with the flat-target convention: 1 when every residual is zero,
/// otherwise an error.
fn held_out_r2(truth: &[f64], pred: &[f64]) -> Result<f64, EnsembleError> {
    match crate::stats::r2_score(truth, pred) {
        Ok(r2) => Ok(r2),
        Err(_) if truth.iter().zip(pred).all(|(a, b)| a == b) => Ok(1.0),
        Err(_) => Err(EnsembleError::FlatTarget),
    }
}

pub fn kfold_r2(
    features: &[FeatureVector],
    lengths: &[f64],
    config: &EnsembleConfig,
) -> Result<KFoldReport, EnsembleError> {
    config.validate()?;
    let k = config.k_folds;
    check_training_data(features, lengths, k.max(2))?;
    let fold = fold_assignment(
        lengths.len(),
        k,
        &mut SplitMix64::new(derived_seed(config.seed, SALT_KFOLD)),
    );
    let folds = (0..k)
        .map(|f| {
            let idx_train: Vec<usize> = (0..lengths.len()).filter(|&i| fold[i] != f).collect();
            let idx_test: Vec<usize> = (0..lengths.len()).filter(|&i| fold[i] == f).collect();
            let ft: Vec<FeatureVector> = idx_train.iter().map(|&i| features[i]).collect();
            let yt: Vec<f64> = idx_train.iter().map(|&i| lengths[i]).collect();
            let model = train_voting_ensemble(&ft, &yt, config)?;
            let truth: Vec<f64> = idx_test.iter().map(|&i| lengths[i]).collect();
            let members: Vec<[f64; 4]> = idx_test
                .iter()
                .map(|&i| model.member_predictions(&features[i]))
                .collect::<Result<_, _>>()?;
            let column = |j: usize| members.iter().map(|m| m[j]).collect::<Vec<f64>>();
            let ensemble: Vec<f64> = members.iter().map(vote).collect();
            Ok(FoldScores {
                ensemble: held_out_r2(&truth, &ensemble)?,
                extra_trees: held_out_r2(&truth, &column(0))?,
                adaboost: held_out_r2(&truth, &column(1))?,
                lasso: held_out_r2(&truth, &column(2))?,
                stack: held_out_r2(&truth, &column(3))?,
            })
        })
        .collect::<Result<Vec<_>, EnsembleError>>()?;
    let avg = |g: fn(&FoldScores) -> f64| folds.iter().map(g).sum::<f64>() / folds.len() as f64;
    let mean = FoldScores {
        ensemble: avg(|s| s.ensemble),
        extra_trees: avg(|s| s.extra_trees),
        adaboost: avg(|s| s.adaboost),
        lasso: avg(|s| s.lasso),
        stack: avg(|s| s.stack),
    };
    Ok(KFoldReport { folds, mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law_data(n: usize, seed: u64) -> (Vec<FeatureVector>, Vec<f64>) {
        let mut rng = SplitMix64::new(seed);
        let feats: Vec<FeatureVector> = (0..n)
            .map(|_| {
                let w = 20.0 + 30.0 * rng.next_f64();
                let h = 40.0 + 50.0 * rng.next_f64();
                FeatureVector::new(0.78 * w * h, w, h)
            })
            .collect();
        let y = feats.iter().map(|f| 2.0 * f.height).collect();
        (feats, y)
    }

    fn small_config() -> EnsembleConfig {
        EnsembleConfig {
            extra_trees: ExtraTreesConfig { n_trees: 20, ..Default::default() },
            adaboost: AdaBoostConfig { n_rounds: 10, ..Default::default() },
            gbdt: GbdtConfig { n_rounds: 30, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn vote_is_the_mean() {
        assert_eq!(vote(&[10.0, 12.0, 14.0, 12.0]), 12.0);
        assert_eq!(vote(&[7.25; 4]), 7.25);
    }

    #[test]
    fn constant_targets_predict_the_constant() {
        let (f, _) = law_data(30, 1);
        let y = vec![57.0; 30];
        let model = train_voting_ensemble(&f, &y, &small_config()).unwrap();
        for q in [FeatureVector::new(1.0, 2.0, 3.0), f[4], FeatureVector::new(9e3, 80.0, 120.0)] {
            let p = model.predict(&q).unwrap();
            assert!((p - 57.0).abs() < 1e-9, "{p}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let (f, y) = law_data(9, 2);
        assert!(matches!(
            train_voting_ensemble(&f, &y, &small_config()),
            Err(EnsembleError::InsufficientData { .. })
        ));
        let (mut f, y) = law_data(12, 2);
        f[3].width = f64::NAN;
        assert!(matches!(
            train_voting_ensemble(&f, &y, &small_config()),
            Err(EnsembleError::NonFiniteInput(3))
        ));
        let (f, y) = law_data(12, 2);
        assert!(matches!(
            train_voting_ensemble(&f, &y[..11], &small_config()),
            Err(EnsembleError::LengthMismatch { .. })
        ));
        let cfg = EnsembleConfig { knn_k: 0, ..small_config() };
        assert!(matches!(train_voting_ensemble(&f, &y, &cfg), Err(EnsembleError::InvalidConfig(_))));
    }

    #[test]
    fn lasso_without_penalty_matches_ols() {
        let (f, _) = law_data(40, 3);
        let mut rng = SplitMix64::new(8);
        let y: Vec<f64> = f
            .iter()
            .map(|v| 0.01 * v.area + 1.5 * v.width - 0.7 * v.height + rng.next_f64())
            .collect();
        let cfg = EnsembleConfig {
            lasso: LassoConfig { lambda: Some(0.0), tol: 1e-12, ..Default::default() },
            ridge_lambda: 0.0,
            ..Default::default()
        };
        let BaseModel::Lasso { standardizer, model } = train_base(BaseKind::Lasso, &f, &y, &cfg).unwrap()
        else {
            panic!()
        };
        let BaseModel::Ridge { standardizer: s2, model: ols } =
            train_base(BaseKind::Ridge, &f, &y, &cfg).unwrap()
        else {
            panic!()
        };
        let (b0, b) = model.raw_coefficients(&standardizer);
        let (c0, c): (f64, Vec<f64>) = (
            ols.intercept - ols.coef.iter().zip(&s2.mean).zip(&s2.scale).map(|((b, m), s)| b * m / s).sum::<f64>(),
            ols.coef.iter().zip(&s2.scale).map(|(b, s)| b / s).collect(),
        );
        assert!((b0 - c0).abs() < 1e-4, "{b0} {c0}");
        for (u, v) in b.iter().zip(&c) {
            assert!((u - v).abs() < 1e-4, "{u} {v}");
        }
    }

    #[test]
    fn ridge_singular_and_knn_exact() {
        let f: Vec<FeatureVector> =
            (0..12).map(|i| FeatureVector::new(2.0 * i as f64, i as f64, 5.0)).collect();
        let y: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let cfg = EnsembleConfig { ridge_lambda: 0.0, knn_k: 1, ..Default::default() };
        assert!(matches!(
            train_base(BaseKind::Ridge, &f, &y, &cfg),
            Err(EnsembleError::SingularDesign)
        ));
        let knn = train_base(BaseKind::Knn, &f, &y, &cfg).unwrap();
        for (q, t) in f.iter().zip(&y) {
            assert_eq!(knn.predict(q), *t);
        }
    }

    #[test]
    fn json_round_trip_and_errors() {
        let (f, y) = law_data(25, 4);
        let model = train_voting_ensemble(&f, &y, &small_config()).unwrap();
        let text = model_to_json(&model);
        let back = model_from_json(&text).unwrap();
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let q = FeatureVector::new(3000.0 * rng.next_f64(), 60.0 * rng.next_f64(), 99.0 * rng.next_f64());
            assert_eq!(model.predict(&q).unwrap().to_bits(), back.predict(&q).unwrap().to_bits());
        }
        assert_eq!(model_to_json(&back), text);
        assert!(matches!(
            model_from_json(&text[..text.len() / 2]),
            Err(EnsembleError::CorruptModel(_))
        ));
        let bumped = text.replacen("\"version\":\"1\"", "\"version\":\"999\"", 1);
        assert!(matches!(model_from_json(&bumped), Err(EnsembleError::VersionMismatch { .. })));
    }

    #[test]
    fn untrained_model_is_rejected() {
        let (f, y) = law_data(20, 6);
        let mut model = train_voting_ensemble(&f, &y, &small_config()).unwrap();
        model.adaboost.trees.clear();
        model.adaboost.weights.clear();
        assert!(matches!(model.predict(&f[0]), Err(EnsembleError::UntrainedModel)));
    }

    #[test]
    fn flat_held_out_targets() {
        assert_eq!(held_out_r2(&[3.0, 3.0], &[3.0, 3.0]).unwrap(), 1.0);
        assert!(matches!(held_out_r2(&[3.0, 3.0], &[3.0, 3.1]), Err(EnsembleError::FlatTarget)));
    }
}
