//! Ridge, KNN and GBDT combined by non-negative least squares on their
//! out-of-fold predictions.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gbdt::{Gbdt, GbdtConfig};
use super::knn::Knn;
use super::linear::{Ridge, Standardizer};
use super::{fold_assignment, nnls, select_rows, EnsembleError};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    pub ridge: Ridge,
    pub knn: Knn,
    pub gbdt: Gbdt,
    /// Meta weights for (ridge, knn, gbdt); non-negative, no intercept.
    pub weights: [f64; 3],
}

pub(crate) struct StackParams<'a> {
    pub ridge_lambda: f64,
    pub knn_k: usize,
    pub gbdt: &'a GbdtConfig,
    pub k_folds: usize,
    pub fold_seed: u64,
    pub gbdt_seed: u64,
}

struct Members {
    ridge: Ridge,
    knn: Knn,
    gbdt: Gbdt,
}

impl Members {
    fn fit(
        x: &[Vec<f64>],
        z: &[Vec<f64>],
        y: &[f64],
        p: &StackParams,
        gbdt_rng: &mut SplitMix64,
    ) -> Result<Self, EnsembleError> {
        Ok(Self {
            ridge: Ridge::fit(z, y, p.ridge_lambda)?,
            knn: Knn::fit(z, y, p.knn_k),
            gbdt: Gbdt::fit(x, y, p.gbdt, gbdt_rng),
        })
    }

    fn predict(&self, x: &[f64], z: &[f64]) -> [f64; 3] {
        [self.ridge.predict(z), self.knn.predict(z), self.gbdt.predict(x)]
    }
}

impl Stack {
    pub(crate) fn fit(
        x: &[Vec<f64>],
        standardizer: &Standardizer,
        y: &[f64],
        p: &StackParams,
    ) -> Result<Self, EnsembleError> {
        let n = y.len();
        let k = p.k_folds.min(n);
        let fold = fold_assignment(n, k, &mut SplitMix64::new(p.fold_seed));

        let per_fold: Vec<Vec<(usize, [f64; 3])>> = (0..k)
            .into_par_iter()
            .map(|f| {
                let (xt, yt, _) = select_rows(x, y, &fold, |g| g != f);
                let (xh, _, held) = select_rows(x, y, &fold, |g| g == f);
                let local = Standardizer::fit(&xt);
                let zt = local.transform(&xt);
                let mut rng = SplitMix64::substream(p.gbdt_seed, f as u64 + 1);
                let m = Members::fit(&xt, &zt, &yt, p, &mut rng)?;
                Ok(held
                    .iter()
                    .zip(&xh)
                    .map(|(&i, row)| (i, m.predict(row, &local.transform_row(row))))
                    .collect())
            })
            .collect::<Result<_, EnsembleError>>()?;

        let mut oof = DMatrix::zeros(n, 3);
        for (i, preds) in per_fold.into_iter().flatten() {
            for (j, v) in preds.into_iter().enumerate() {
                oof[(i, j)] = v;
            }
        }
        let w = nnls(&oof, &DVector::from_column_slice(y));

        let z = standardizer.transform(x);
        let full = Members::fit(x, &z, y, p, &mut SplitMix64::substream(p.gbdt_seed, 0))?;
        Ok(Self {
            ridge: full.ridge,
            knn: full.knn,
            gbdt: full.gbdt,
            weights: [w[0], w[1], w[2]],
        })
    }

    pub fn member_predictions(&self, x: &[f64], z: &[f64]) -> [f64; 3] {
        [self.ridge.predict(z), self.knn.predict(z), self.gbdt.predict(x)]
    }

    pub fn predict(&self, x: &[f64], z: &[f64]) -> f64 {
        self.member_predictions(x, z)
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| p * w)
            .sum()
    }
}
