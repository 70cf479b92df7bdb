//! AdaBoost.R2 (Drucker, 1997) with CART base learners trained on
//! weight-proportional bootstrap resamples and the linear loss.

use serde::{Deserialize, Serialize};

use super::tree::{fit_cart, GrowParams, Tree};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        Self {
            n_rounds: 50,
            max_depth: 3,
            learning_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub trees: Vec<Tree>,
    pub weights: Vec<f64>,
    /// Weighted average linear loss of each round's learner.
    #[serde(skip)]
    pub loss_trace: Vec<f64>,
    /// Mean absolute training error of the weighted-median ensemble after
    /// each round.
    #[serde(skip)]
    pub train_error_trace: Vec<f64>,
}

fn weighted_resample(weights: &[f64], rng: &mut SplitMix64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let last = weights.len() - 1;
    (0..weights.len())
        .map(|_| {
            let u = rng.next_f64() * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

impl AdaBoost {
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &AdaBoostConfig, rng: &mut SplitMix64) -> Self {
        let n = y.len();
        let params = GrowParams {
            max_depth: Some(config.max_depth),
            min_samples_split: 2,
        };
        let mut w = vec![1.0 / n as f64; n];
        let mut model = Self {
            trees: Vec::new(),
            weights: Vec::new(),
            loss_trace: Vec::new(),
            train_error_trace: Vec::new(),
        };
        // per-row predictions of every learner so far
        let mut staged: Vec<Vec<f64>> = vec![Vec::new(); n];
        let scale = y.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let roundoff = 64.0 * f64::EPSILON * scale;
        for round in 0..config.n_rounds {
            let rows = weighted_resample(&w, rng);
            let tree = fit_cart(x, y, rows, params);
            let err: Vec<f64> = x
                .iter()
                .zip(y)
                .map(|(r, t)| (tree.predict(r) - t).abs())
                .collect();
            let max_err = err.iter().copied().fold(0.0, f64::max);
            if max_err <= roundoff {
                // perfect fit: this learner decides alone
                model.loss_trace.push(0.0);
                model.push_round(tree, 1.0, x, y, &mut staged);
                break;
            }
            let avg_loss: f64 = err.iter().zip(&w).map(|(e, wi)| wi * e / max_err).sum();
            if avg_loss >= 0.5 {
                if round == 0 {
                    model.loss_trace.push(avg_loss);
                    model.push_round(tree, 1.0, x, y, &mut staged);
                }
                break;
            }
            model.loss_trace.push(avg_loss);
            let beta = avg_loss / (1.0 - avg_loss);
            model.push_round(tree, config.learning_rate * (1.0 / beta).ln(), x, y, &mut staged);
            for (wi, e) in w.iter_mut().zip(&err) {
                *wi *= beta.powf((1.0 - e / max_err) * config.learning_rate);
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                break;
            }
            w.iter_mut().for_each(|wi| *wi /= total);
        }
        model
    }

    fn push_round(&mut self, tree: Tree, weight: f64, x: &[Vec<f64>], y: &[f64], staged: &mut [Vec<f64>]) {
        for (row, preds) in x.iter().zip(staged.iter_mut()) {
            preds.push(tree.predict(row));
        }
        self.trees.push(tree);
        self.weights.push(weight);
        let total: f64 = staged
            .iter()
            .zip(y)
            .map(|(preds, t)| (weighted_median(preds, &self.weights) - t).abs())
            .sum();
        self.train_error_trace.push(total / y.len() as f64);
    }

    /// Weighted median of the learners' predictions.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let preds: Vec<f64> = self.trees.iter().map(|t| t.predict(x)).collect();
        weighted_median(&preds, &self.weights)
    }
}

/// Smallest prediction whose cumulative weight reaches half the total.
fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut preds: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    preds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = preds.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(p, w) in &preds {
        acc += w;
        if acc >= 0.5 * total {
            return p;
        }
    }
    preds[preds.len() - 1].0
}
