//! Extra Trees: an average of extremely randomized trees grown on the full
//! training set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_extra_tree, GrowParams, Tree};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraTreesConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ExtraTreesConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraTrees {
    pub trees: Vec<Tree>,
}

impl ExtraTrees {
    /// Tree `t` draws from `SplitMix64::substream(seed, t)`, so the forest
    /// does not depend on how trees are scheduled across threads.
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &ExtraTreesConfig, seed: u64) -> Self {
        let params = GrowParams {
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split,
        };
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| fit_extra_tree(x, y, params, &mut SplitMix64::substream(seed, t as u64)))
            .collect();
        Self { trees }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}
