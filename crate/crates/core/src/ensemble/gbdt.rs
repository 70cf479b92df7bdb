//! Least-squares gradient boosting with shrinkage.

use serde::{Deserialize, Serialize};

use super::tree::{fit_cart, GrowParams, Tree};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Fraction of rows drawn (without replacement) for each round.
    pub subsample: f64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            subsample: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbdt {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Training MSE of the initial constant, then after every round.
    #[serde(skip)]
    pub mse_trace: Vec<f64>,
}

fn mse(y: &[f64], f: &[f64]) -> f64 {
    y.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}

impl Gbdt {
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &GbdtConfig, rng: &mut SplitMix64) -> Self {
        let n = y.len();
        let init = y.iter().sum::<f64>() / n as f64;
        let mut fitted = vec![init; n];
        let mut trace = vec![mse(y, &fitted)];
        let mut trees = Vec::with_capacity(config.n_rounds);
        let params = GrowParams {
            max_depth: Some(config.max_depth),
            min_samples_split: 2,
        };
        let n_sub = ((config.subsample * n as f64).round() as usize).clamp(1, n);
        for _ in 0..config.n_rounds {
            let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
            let rows: Vec<usize> = if n_sub < n {
                let mut all: Vec<usize> = (0..n).collect();
                rng.shuffle(&mut all);
                all.truncate(n_sub);
                all.sort_unstable();
                all
            } else {
                (0..n).collect()
            };
            let tree = fit_cart(x, &resid, rows, params);
            for (f, row) in fitted.iter_mut().zip(x) {
                *f += config.learning_rate * tree.predict(row);
            }
            trace.push(mse(y, &fitted));
            trees.push(tree);
        }
        Self {
            init,
            learning_rate: config.learning_rate,
            trees,
            mse_trace: trace,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.init, |acc, t| acc + self.learning_rate * t.predict(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_error_never_increases() {
        let mut rng = SplitMix64::new(11);
        let x: Vec<Vec<f64>> = (0..80)
            .map(|_| vec![rng.next_f64() * 10.0, rng.next_f64() * 5.0])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| (r[0]).sin() * 3.0 + r[1] * r[1]).collect();
        let model = Gbdt::fit(&x, &y, &GbdtConfig::default(), &mut SplitMix64::new(1));
        let t = &model.mse_trace;
        assert_eq!(t.len(), 101);
        assert!(t.windows(2).all(|w| w[1] <= w[0]), "{t:?}");
        assert!(t[100] < 0.1 * t[0]);
    }

    #[test]
    fn constant_target() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let model = Gbdt::fit(&x, &[4.0; 12], &GbdtConfig::default(), &mut SplitMix64::new(1));
        assert_eq!(model.predict(&[3.3]), 4.0);
    }
}
