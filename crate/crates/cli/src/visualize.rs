use std::path::Path;

use anyhow::{bail, Context, Result};
use lvef_core::cycles::AreaSeries;
use lvef_core::geometry::read_features_csv;
use lvef_core::report::render_beat_to_beat_svg;
use lvef_core::VideoResult;

use crate::fsio::{write_atomic, ResultFile};
use crate::usage;

fn pick(file: ResultFile, video_id: Option<&str>) -> Result<VideoResult> {
    match (file, video_id) {
        (ResultFile::Single(r), None) => Ok(*r),
        (ResultFile::Single(r), Some(id)) if r.video_id == id => Ok(*r),
        (ResultFile::Single(r), Some(id)) => bail!("result is for {}, not {id}", r.video_id),
        (ResultFile::Batch { results }, Some(id)) => results
            .into_iter()
            .find(|r| r.video_id == id)
            .with_context(|| format!("no result for {id}")),
        (ResultFile::Batch { .. }, None) => Err(usage("batch result: pass --video-id")),
    }
}

pub fn visualize(result: &Path, areas: &Path, out: &Path, video_id: Option<&str>) -> Result<()> {
    let text = std::fs::read_to_string(result).with_context(|| format!("reading {}", result.display()))?;
    let file: ResultFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", result.display()))?;
    let r = pick(file, video_id)?;

    let csv = std::fs::File::open(areas).with_context(|| format!("opening {}", areas.display()))?;
    let mut rows: Vec<_> = read_features_csv(csv)
        .map_err(anyhow::Error::msg)?
        .into_iter()
        .filter(|row| row.video_id == r.video_id)
        .map(|row| row.features)
        .collect();
    rows.sort_by_key(|f| f.frame_index);
    if rows.is_empty() {
        bail!("no areas for {} in {}", r.video_id, areas.display());
    }
    if rows.iter().enumerate().any(|(i, f)| f.frame_index != i) {
        bail!("areas for {} are not frames 0..{}", r.video_id, rows.len());
    }
    let series = AreaSeries::new(r.video_id.clone(), rows.iter().map(|f| f.area).collect());
    if let Some(c) = r.cycles.iter().find(|c| c.cycle.es_frame >= series.len()) {
        bail!("cycle ES frame {} past the {} area frames", c.cycle.es_frame, series.len());
    }
    let cycles: Vec<_> = r.cycles.iter().map(|c| c.cycle).collect();
    let efs: Vec<f64> = r.cycles.iter().map(|c| c.ef).collect();
    let svg = render_beat_to_beat_svg(&series, &cycles, &efs, r.ef_all_cycles, &r.phenotype.to_string());
    write_atomic(out, svg.as_bytes())
}
