use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lvef_core::dataset::{encode_pgm, frame_file_name, video_id, TraceFrame, VideoRecord};
use lvef_core::geometry::{
    polygon_from_trace, rasterize_polygon, trace_length, write_features_csv, FeatureRow,
};
use lvef_core::pipeline::sequence_features;
use lvef_core::{extract_features, parse_manifest, parse_tracings, read_mask_sequence};
use rayon::prelude::*;

use crate::fsio::{sequence_dirs, write_atomic};

fn features_bytes(rows: &[FeatureRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_features_csv(rows, &mut buf)?;
    Ok(buf)
}

fn labeled_rows(
    record: &VideoRecord,
    frames: &[TraceFrame],
    mask_dir: &Path,
) -> (Vec<FeatureRow>, Vec<String>) {
    let id = video_id(&record.file_name);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for trace in frames {
        let mask = polygon_from_trace(trace)
            .map_err(|e| e.to_string())
            .and_then(|poly| {
                rasterize_polygon(&poly, record.frame_width, record.frame_height)
                    .map_err(|e| e.to_string())
            });
        let mask = match mask {
            Ok(m) => m,
            Err(e) => {
                skipped.push(format!("{id} frame {}: {e}", trace.frame_index));
                continue;
            }
        };
        let path = mask_dir.join(id).join(frame_file_name(trace.frame_index));
        if let Err(e) = write_atomic(&path, &encode_pgm(&mask)) {
            skipped.push(format!("{id} frame {}: {e:#}", trace.frame_index));
            continue;
        }
        rows.push(FeatureRow {
            video_id: id.to_string(),
            features: extract_features(&mask, trace.frame_index),
            length: Some(trace_length(trace)),
            split: Some(record.split),
        });
    }
    (rows, skipped)
}

pub fn ingest(manifest: &Path, tracings: &Path, out: &Path) -> Result<()> {
    let records = parse_manifest(manifest)?;
    let traces = parse_tracings(tracings)?;
    let by_id: BTreeMap<&str, &VideoRecord> =
        records.iter().map(|r| (video_id(&r.file_name), r)).collect();

    let mask_dir = out.join("labeled");
    let mut unmatched = Vec::new();
    let jobs: Vec<(&VideoRecord, &Vec<TraceFrame>)> = traces
        .iter()
        .filter_map(|(id, frames)| match by_id.get(id.as_str()) {
            Some(r) => Some((*r, frames)),
            None => {
                unmatched.push(id.clone());
                None
            }
        })
        .collect();
    for id in &unmatched {
        eprintln!("warning: {id} has tracings but no manifest row");
    }

    let per_video: Vec<(Vec<FeatureRow>, Vec<String>)> = jobs
        .par_iter()
        .map(|(record, frames)| labeled_rows(record, frames, &mask_dir))
        .collect();
    let mut rows = Vec::new();
    for (r, skipped) in per_video {
        for s in skipped {
            eprintln!("warning: skipped {s}");
        }
        rows.extend(r);
    }
    if rows.is_empty() {
        bail!("no traced frame could be rasterized");
    }
    let csv = out.join("features.csv");
    write_atomic(&csv, &features_bytes(&rows)?)?;
    println!("{} labeled frames from {} videos -> {}", rows.len(), jobs.len(), csv.display());
    Ok(())
}

pub fn extract(masks: &Path, out: &Path) -> Result<()> {
    let dirs = sequence_dirs(masks)?;
    let per_video: Vec<Vec<FeatureRow>> = dirs
        .par_iter()
        .map(|dir| {
            let seq = read_mask_sequence(dir)?;
            Ok(sequence_features(&seq)
                .into_iter()
                .map(|features| FeatureRow {
                    video_id: seq.video_id.clone(),
                    features,
                    length: None,
                    split: None,
                })
                .collect())
        })
        .collect::<Result<_>>()
        .context("reading mask sequences")?;
    let rows: Vec<FeatureRow> = per_video.into_iter().flatten().collect();
    write_atomic(out, &features_bytes(&rows)?)
}
