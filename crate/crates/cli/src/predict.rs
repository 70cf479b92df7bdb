use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use lvef_core::cycles::PeakParams;
use lvef_core::ensemble::load_model;
use lvef_core::pipeline::{EfMode, PipelineError, VolumeConstant};
use lvef_core::{read_mask_sequence, run_pipeline, LengthModel, PipelineConfig, VideoResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::fsio::{sequence_dirs, write_json};
use crate::usage;

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// A mask sequence directory, or a directory of them.
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub jeffrey_fraction: f64,
    #[arg(long, default_value_t = 20)]
    pub min_distance: usize,
    #[arg(long, default_value_t = 0.5)]
    pub prominence_fraction: f64,
    /// `c` in V = c·A²/L. Defaults to 8/(3π).
    #[arg(long)]
    pub volume_constant: Option<f64>,
    /// Report the first cycle's EF instead of the all-cycle mean.
    #[arg(long)]
    pub single_cycle: bool,
    /// Use the raw areas at the detected frames.
    #[arg(long)]
    pub no_refine: bool,
    /// Estimate ED/ES areas from the 90th/10th percentiles when no cycle is found.
    #[arg(long)]
    pub percentile_fallback: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

impl PredictArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let peaks = PeakParams {
            min_distance: self.min_distance,
            prominence_fraction: self.prominence_fraction,
        };
        peaks.validate().map_err(|e| usage(e.to_string()))?;
        if !(self.jeffrey_fraction > 0.0 && self.jeffrey_fraction <= 1.0) {
            return Err(usage(format!("--jeffrey-fraction {} outside (0, 1]", self.jeffrey_fraction)));
        }
        let volume_constant = match self.volume_constant {
            Some(c) => VolumeConstant::new(c).map_err(|e| usage(e.to_string()))?,
            None => VolumeConstant::default(),
        };
        Ok(PipelineConfig {
            peaks,
            jeffrey_fraction: self.jeffrey_fraction,
            refine: !self.no_refine,
            volume_constant,
            ef_mode: if self.single_cycle { EfMode::SingleCycle } else { EfMode::AllCycles },
            percentile_fallback: self.percentile_fallback,
        })
    }
}

#[derive(Debug, Serialize)]
struct Failure {
    video_id: String,
    no_cycles: bool,
    error: String,
}

#[derive(Debug, Serialize)]
struct Batch {
    results: Vec<VideoResult>,
    failures: Vec<Failure>,
}

fn predict_one(dir: &Path, model: &LengthModel, config: &PipelineConfig) -> Result<VideoResult> {
    let masks = read_mask_sequence(dir)?;
    Ok(run_pipeline(&masks, model, config)?)
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let config = args.config()?;
    let model = load_model(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let dirs = sequence_dirs(&args.masks)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;

    if dirs.len() == 1 && dirs[0] == args.masks {
        let result = pool.install(|| predict_one(&dirs[0], &model, &config))?;
        return write_json(&args.out, &result);
    }

    let outcomes: Vec<(String, Result<VideoResult>)> = pool.install(|| {
        dirs.par_iter()
            .map(|d| {
                let id = d.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (id, predict_one(d, &model, &config))
            })
            .collect()
    });
    let mut batch = Batch { results: vec![], failures: vec![] };
    for (video_id, outcome) in outcomes {
        match outcome {
            Ok(r) => batch.results.push(r),
            Err(e) => {
                let no_cycles = e
                    .downcast_ref::<PipelineError>()
                    .is_some_and(PipelineError::is_no_cycles);
                eprintln!("warning: {video_id}: {e:#}");
                batch.failures.push(Failure { video_id, no_cycles, error: format!("{e:#}") });
            }
        }
    }
    write_json(&args.out, &batch)?;
    if batch.results.is_empty() {
        if batch.failures.iter().all(|f| f.no_cycles) {
            return Err(PipelineError::NoCycles).context("no video produced an EF");
        }
        anyhow::bail!("no video produced an EF");
    }
    Ok(())
}
