//! CSV forms of meta-features and meta-datasets.

use std::path::Path;

use metair_core::learners::LearnerKind;
use metair_core::meta_features::{MetaFeatureVector, META_FEATURE_NAMES};
use metair_core::meta_ir::{MetaDataset, MetaRow, Pipeline};
use metair_core::metrics::Metric;
use metair_core::ResamplingKind;

use crate::error::{Error, Result};

/// Writes a header and rows of already formatted cells.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Header and rows of a CSV file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| Error::csv(path, e))?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub fn parse_f64(cell: &str, what: &str) -> Result<f64> {
    cell.trim()
        .parse()
        .map_err(|_| Error::Format(format!("{what}: `{cell}` is not a number")))
}

pub fn pipeline_column(l: LearnerKind, r: ResamplingKind) -> String {
    format!("{}/{}", l.name(), r.name())
}

pub fn write_meta_features(path: &Path, rows: &[(String, MetaFeatureVector)]) -> Result<()> {
    let mut header = vec!["dataset"];
    header.extend(META_FEATURE_NAMES.iter());
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, f)| {
            let mut r = vec![name.clone()];
            r.extend(f.values().iter().map(f64::to_string));
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Dataset name, the 43 meta-features, the two labels and one score column
/// per pipeline, learner-major.
pub fn write_meta_dataset(path: &Path, m: &MetaDataset) -> Result<()> {
    let score_cols: Vec<String> = m
        .learners
        .iter()
        .flat_map(|&l| m.resamplers.iter().map(move |&r| pipeline_column(l, r)))
        .collect();
    let mut header = vec!["dataset"];
    header.extend(META_FEATURE_NAMES.iter());
    header.extend(["best_learner", "best_resampler"]);
    header.extend(score_cols.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = m
        .rows
        .iter()
        .map(|row| {
            let mut r = vec![row.dataset.clone()];
            r.extend(row.features.values().iter().map(f64::to_string));
            r.push(row.best.learner.name().to_string());
            r.push(row.best.resampler.name().to_string());
            r.extend(row.scores.iter().map(f64::to_string));
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

pub fn read_meta_dataset(path: &Path, metric: Metric) -> Result<MetaDataset> {
    let (header, rows) = read_csv(path)?;
    let nf = META_FEATURE_NAMES.len();
    let bad = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
    if header.len() < nf + 4
        || header[0] != "dataset"
        || header[1..=nf].iter().zip(META_FEATURE_NAMES.iter()).any(|(a, b)| a != b)
        || header[nf + 1] != "best_learner"
        || header[nf + 2] != "best_resampler"
    {
        return Err(bad("not a meta-dataset table".to_string()));
    }
    let mut cells = Vec::new();
    for col in &header[nf + 3..] {
        let (l, r) = col.split_once('/').ok_or_else(|| bad(format!("bad score column `{col}`")))?;
        let l = LearnerKind::from_name(l).ok_or_else(|| bad(format!("unknown learner in `{col}`")))?;
        let r = ResamplingKind::from_name(r).ok_or_else(|| bad(format!("unknown strategy in `{col}`")))?;
        cells.push((l, r));
    }
    let mut learners: Vec<LearnerKind> = Vec::new();
    let mut resamplers: Vec<ResamplingKind> = Vec::new();
    for &(l, r) in &cells {
        if !learners.contains(&l) {
            learners.push(l);
        }
        if !resamplers.contains(&r) {
            resamplers.push(r);
        }
    }
    let expected: Vec<(LearnerKind, ResamplingKind)> = learners
        .iter()
        .flat_map(|&l| resamplers.iter().map(move |&r| (l, r)))
        .collect();
    if expected != cells {
        return Err(bad("score columns are not a learner-major grid".to_string()));
    }
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        if r.len() != header.len() {
            return Err(bad(format!("row `{}` has {} cells", r[0], r.len())));
        }
        let values = r[1..=nf]
            .iter()
            .map(|c| parse_f64(c, &r[0]))
            .collect::<Result<Vec<_>>>()?;
        let learner = LearnerKind::from_name(&r[nf + 1]).ok_or_else(|| bad(format!("unknown learner `{}`", r[nf + 1])))?;
        let resampler =
            ResamplingKind::from_name(&r[nf + 2]).ok_or_else(|| bad(format!("unknown strategy `{}`", r[nf + 2])))?;
        out.push(MetaRow {
            dataset: r[0].clone(),
            features: MetaFeatureVector::from_values(values)?,
            best: Pipeline::new(resampler, learner),
            scores: r[nf + 3..].iter().map(|c| parse_f64(c, &r[0])).collect::<Result<_>>()?,
        });
    }
    out.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    Ok(MetaDataset {
        learners,
        resamplers,
        metric,
        rows: out,
        skipped: Vec::new(),
    })
}
