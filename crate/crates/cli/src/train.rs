use std::path::Path;

use anyhow::{bail, Context, Result};
use lvef_core::dataset::Split;
use lvef_core::ensemble::{kfold_r2, model_to_json, train_voting_ensemble, FeatureVector};
use lvef_core::geometry::read_features_csv;
use lvef_core::EnsembleConfig;

use crate::fsio::write_atomic;
use crate::usage;

pub fn train_length(features: &Path, split: Split, k: usize, seed: u64, out: &Path) -> Result<()> {
    if k < 2 {
        return Err(usage(format!("--k must be at least 2, got {k}")));
    }
    let file = std::fs::File::open(features)
        .with_context(|| format!("opening {}", features.display()))?;
    let rows = read_features_csv(file).map_err(anyhow::Error::msg)
        .with_context(|| format!("reading {}", features.display()))?;
    let has_split = rows.iter().any(|r| r.split.is_some());
    if !has_split {
        eprintln!("warning: no split column, training on every labeled row");
    }
    let (x, y): (Vec<FeatureVector>, Vec<f64>) = rows
        .iter()
        .filter(|r| !has_split || r.split == Some(split))
        .filter_map(|r| r.length.map(|l| (FeatureVector::from(&r.features), l)))
        .unzip();
    if x.is_empty() {
        bail!("no labeled rows in split {split}");
    }

    let config = EnsembleConfig { k_folds: k, seed, ..Default::default() };
    let report = kfold_r2(&x, &y, &config)?;
    for (i, f) in report.folds.iter().enumerate() {
        println!(
            "fold {}: R² ensemble {:.4} (extra_trees {:.4}, adaboost {:.4}, lasso {:.4}, stack {:.4})",
            i + 1,
            f.ensemble,
            f.extra_trees,
            f.adaboost,
            f.lasso,
            f.stack
        );
    }
    println!("mean R² {:.4} over {} samples", report.mean.ensemble, x.len());

    let model = train_voting_ensemble(&x, &y, &config)?;
    write_atomic(out, model_to_json(&model).as_bytes())
}
