//! `lvef`: ingest labeled echo data, train the LV length model, predict
//! ejection fraction from mask sequences, evaluate and visualize.

mod evaluate;
mod fsio;
mod ingest;
mod predict;
mod train;
mod visualize;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lvef_core::dataset::Split;
use lvef_core::pipeline::PipelineError;

#[derive(Debug, Parser)]
#[command(name = "lvef", version, about = "LV ejection fraction from segmentation masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rasterize traced frames to PGM masks and write a labeled features CSV.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        tracings: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-frame area, width and height of one or many mask sequences.
    Extract {
        #[arg(long)]
        masks: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the LV length ensemble and report k-fold R².
    TrainLength {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_parser = parse_split, default_value = "train")]
        train_split: Split,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// EF of a mask sequence, or of every sequence under a directory.
    Predict(predict::PredictArgs),
    /// Agreement and HFrEF classification metrics against labels.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Beat-to-beat SVG of one predicted video.
    Visualize {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        areas: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Which video to draw when the result file holds a batch.
        #[arg(long)]
        video_id: Option<String>,
    },
}

fn parse_split(s: &str) -> Result<Split, String> {
    s.parse()
}

/// Bad flag values found after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    let no_cycles = err
        .chain()
        .any(|e| e.downcast_ref::<PipelineError>().is_some_and(PipelineError::is_no_cycles));
    if no_cycles {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { manifest, tracings, out } => ingest::ingest(&manifest, &tracings, &out),
        Command::Extract { masks, out } => ingest::extract(&masks, &out),
        Command::TrainLength { features, train_split, k, seed, out } => {
            train::train_length(&features, train_split, k, seed, &out)
        }
        Command::Predict(args) => predict::predict(&args),
        Command::Evaluate { predictions, labels, bootstrap, seed, out } => {
            evaluate::evaluate(&predictions, &labels, bootstrap, seed, &out)
        }
        Command::Visualize { result, areas, out, video_id } => {
            visualize::visualize(&result, &areas, &out, video_id.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
