use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lvef_core::dataset::{read_manifest, video_id};
use lvef_core::pipeline::HFREF_THRESHOLD;
use lvef_core::stats::{
    bootstrap_ci, confusion_matrix, paired_t_test, pearson, r2_score, roc_auc, BootstrapSample,
    Interval, Statistic, StatsError,
};
use serde::Serialize;

use crate::fsio::{write_json, ResultFile};

#[derive(Debug, Serialize)]
pub struct PearsonReport {
    pub r: f64,
    pub p: f64,
    pub ci: Option<Interval>,
}

#[derive(Debug, Serialize)]
pub struct TTestReport {
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Serialize)]
pub struct AucReport {
    pub value: f64,
    pub ci: Option<Interval>,
}

#[derive(Debug, Serialize)]
pub struct ConfusionReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub n: usize,
    pub hfref_threshold: f64,
    pub pearson: PearsonReport,
    pub r2: Option<f64>,
    pub t_test: TTestReport,
    pub auc: Option<AucReport>,
    pub roc_points: Vec<(f64, f64)>,
    pub confusion: ConfusionReport,
}

fn csv_column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| names.contains(&h.trim()))
}

/// `(video_id, value)` pairs from a two-column CSV with a header.
fn read_pairs(path: &Path, value_names: &[&str]) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let (Some(id), Some(val)) = (csv_column(&headers, &["video_id"]), csv_column(&headers, value_names))
    else {
        bail!("{}: need columns video_id and one of {value_names:?}", path.display());
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let v: f64 = rec[val]
            .parse()
            .with_context(|| format!("{} line {line}: bad value `{}`", path.display(), &rec[val]))?;
        out.push((rec[id].to_string(), v));
    }
    Ok(out)
}

fn read_predictions(path: &Path) -> Result<Vec<(String, f64)>> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let results = match serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?
        {
            ResultFile::Batch { results } => results,
            ResultFile::Single(r) => vec![*r],
        };
        return Ok(results.into_iter().map(|r| (r.video_id, r.ef)).collect());
    }
    read_pairs(path, &["predicted_ef", "ef"])
}

fn read_labels(path: &Path) -> Result<BTreeMap<String, f64>> {
    let header = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    if header.split(',').any(|h| h.trim() == "FileName") {
        let file = fs::File::open(path)?;
        return Ok(read_manifest(file)?
            .into_iter()
            .map(|r| (video_id(&r.file_name).to_string(), r.ef_label))
            .collect());
    }
    Ok(read_pairs(path, &["label_ef", "ef"])?.into_iter().collect())
}

fn optional_ci(result: Result<Interval, StatsError>, what: &str) -> Option<Interval> {
    match result {
        Ok(ci) => Some(ci),
        Err(e) => {
            eprintln!("warning: no {what} interval: {e}");
            None
        }
    }
}

pub fn build_report(pred: &[f64], label: &[f64], bootstrap: usize, seed: u64) -> Result<Report> {
    let corr = pearson(pred, label).context("Pearson correlation")?;
    let t = paired_t_test(pred, label).context("paired t-test")?;
    let r2 = match r2_score(label, pred) {
        Ok(v) => Some(v),
        Err(StatsError::FlatTarget) => None,
        Err(e) => return Err(e.into()),
    };
    let truth: Vec<bool> = label.iter().map(|&v| v < HFREF_THRESHOLD).collect();
    let decided: Vec<bool> = pred.iter().map(|&v| v < HFREF_THRESHOLD).collect();
    // lower EF is the positive (HFrEF) direction
    let scores: Vec<f64> = pred.iter().map(|v| -v).collect();
    let c = confusion_matrix(&decided, &truth)?;

    let pearson_ci = (bootstrap > 0).then(|| {
        optional_ci(bootstrap_ci(&BootstrapSample::Pairs(pred, label), Statistic::Pearson, bootstrap, seed), "Pearson")
    });
    let (auc, roc_points) = match roc_auc(&scores, &truth) {
        Ok(roc) => {
            let sample = BootstrapSample::Scored { scores: &scores, labels: &truth };
            let ci = (bootstrap > 0)
                .then(|| optional_ci(bootstrap_ci(&sample, Statistic::Auc, bootstrap, seed), "AUC"))
                .flatten();
            (Some(AucReport { value: roc.auc, ci }), roc.points)
        }
        Err(StatsError::SingleClass) => {
            eprintln!("warning: labels hold a single HFrEF class, AUC undefined");
            (None, vec![])
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Report {
        n: pred.len(),
        hfref_threshold: HFREF_THRESHOLD,
        pearson: PearsonReport { r: corr.r, p: corr.p, ci: pearson_ci.flatten() },
        r2,
        t_test: TTestReport { t: t.t, p: t.p },
        auc,
        roc_points,
        confusion: ConfusionReport {
            tp: c.tp,
            fp: c.fp,
            tn: c.tn,
            fn_: c.fn_,
            accuracy: c.accuracy(),
        },
    })
}

pub fn evaluate(predictions: &Path, labels: &Path, bootstrap: usize, seed: u64, out: &Path) -> Result<()> {
    let preds = read_predictions(predictions)?;
    let labels = read_labels(labels)?;
    let (mut p, mut l) = (vec![], vec![]);
    for (id, ef) in &preds {
        match labels.get(id) {
            Some(&y) => {
                p.push(*ef);
                l.push(y);
            }
            None => eprintln!("warning: no label for {id}"),
        }
    }
    if p.is_empty() {
        bail!("no prediction matched a label");
    }
    let report = build_report(&p, &l, bootstrap, seed)?;
    println!(
        "n={} r={:.4} AUC={} accuracy={:.4}",
        report.n,
        report.pearson.r,
        report.auc.as_ref().map_or("n/a".into(), |a| format!("{:.4}", a.value)),
        report.confusion.accuracy
    );
    write_json(out, &report)
}
