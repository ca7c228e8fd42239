//! Evaluation outputs and the summary tables derived from them.

use std::path::Path;

use metair_core::meta_ir::{win_tie_loss, LodoReport, MetaDataset};
use metair_core::metrics::Metric;

use crate::error::{Error, Result};
use crate::tables::{parse_f64, pipeline_column, read_csv, read_meta_dataset, write_csv, write_meta_dataset};

pub const METADATASET: &str = "metadataset.csv";
pub const LODO_SCORES: &str = "lodo_scores.csv";
pub const META_LEVEL: &str = "meta_level.csv";
pub const IMPORTANCE: &str = "importance.csv";
pub const SKIPPED: &str = "skipped.csv";
pub const GRID_SCORES: &str = "grid_scores.csv";
pub const WIN_TIE_LOSS: &str = "win_tie_loss.csv";
pub const WINS_BY_METHOD: &str = "wins_by_method.csv";
pub const MEAN_SCORES: &str = "mean_scores.csv";

const METHODS: [&str; 4] = ["oracle", "metair", "random", "majority"];

/// Writes the per-dataset, meta-level and importance tables of a LODO run,
/// then the summaries. Returns the file names written.
pub fn write_lodo(dir: &Path, rep: &LodoReport) -> Result<Vec<String>> {
    write_meta_dataset(&dir.join(METADATASET), &rep.meta)?;
    write_skipped(dir, &rep.meta)?;

    let mut header = vec!["dataset", "metric"];
    let cols: Vec<String> = METHODS
        .iter()
        .flat_map(|m| [format!("{m}_learner"), format!("{m}_resampler"), format!("{m}_score")])
        .collect();
    header.extend(cols.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.dataset.clone(), rep.metric.name().to_string()];
            for s in [r.oracle, r.metair, r.random, r.majority] {
                cells.push(s.pipeline.learner.name().to_string());
                cells.push(s.pipeline.resampler.name().to_string());
                cells.push(s.score.to_string());
            }
            cells
        })
        .collect();
    write_csv(&dir.join(LODO_SCORES), &header, &rows)?;

    let rows: Vec<Vec<String>> = rep
        .meta_level
        .iter()
        .map(|m| {
            vec![
                m.method.clone(),
                m.f1_macro_learner.to_string(),
                m.f1_macro_resampler.to_string(),
                m.accuracy_learner.to_string(),
                m.accuracy_resampler.to_string(),
            ]
        })
        .collect();
    write_csv(
        &dir.join(META_LEVEL),
        &["method", "f1_macro_learner", "f1_macro_resampler", "accuracy_learner", "accuracy_resampler"],
        &rows,
    )?;

    let mut rows = Vec::new();
    for (model, imp) in [("lambda_L", &rep.importance_learner), ("lambda_R", &rep.importance_resampler)] {
        let mut ranked: Vec<&(String, f64)> = imp.iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        for (rank, (name, v)) in ranked.into_iter().enumerate() {
            rows.push(vec![model.to_string(), (rank + 1).to_string(), name.clone(), v.to_string()]);
        }
    }
    write_csv(&dir.join(IMPORTANCE), &["model", "rank", "feature", "importance"], &rows)?;

    let mut written: Vec<String> = [METADATASET, SKIPPED, LODO_SCORES, META_LEVEL, IMPORTANCE]
        .iter()
        .map(|s| s.to_string())
        .collect();
    written.extend(report(dir)?);
    Ok(written)
}

pub fn write_skipped(dir: &Path, m: &MetaDataset) -> Result<()> {
    let rows: Vec<Vec<String>> = m.skipped.iter().map(|(d, why)| vec![d.clone(), why.clone()]).collect();
    write_csv(&dir.join(SKIPPED), &["dataset", "reason"], &rows)
}

/// Long-format grid: one row per dataset and pipeline.
pub fn write_grid(dir: &Path, m: &MetaDataset) -> Result<Vec<String>> {
    write_meta_dataset(&dir.join(METADATASET), m)?;
    write_skipped(dir, m)?;
    let mut rows = Vec::new();
    for row in &m.rows {
        for (p, s) in m.pipelines().into_iter().zip(&row.scores) {
            rows.push(vec![
                row.dataset.clone(),
                m.metric.name().to_string(),
                p.learner.name().to_string(),
                p.resampler.name().to_string(),
                s.to_string(),
                (p == row.best).to_string(),
            ]);
        }
    }
    write_csv(
        &dir.join(GRID_SCORES),
        &["dataset", "metric", "learner", "resampler", "score", "best"],
        &rows,
    )?;
    Ok(vec![METADATASET.into(), SKIPPED.into(), GRID_SCORES.into()])
}

/// Per-dataset scores of every compared method, read back from a results
/// directory: the LODO methods first, then each grid pipeline.
pub struct ScoreTable {
    pub metric: Metric,
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    /// `scores[m][d]`.
    pub scores: Vec<Vec<f64>>,
}

pub fn read_scores(dir: &Path) -> Result<ScoreTable> {
    if !dir.is_dir() {
        return Err(Error::MissingArtifact(dir.to_path_buf()));
    }
    let (header, rows) = read_csv(&dir.join(LODO_SCORES))?;
    if rows.is_empty() {
        return Err(Error::Format(format!("{}: no evaluated datasets", dir.join(LODO_SCORES).display())));
    }
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("{LODO_SCORES}: missing column `{name}`")))
    };
    let metric_name = &rows[0][col("metric")?];
    let metric = Metric::from_name(metric_name).ok_or_else(|| Error::Format(format!("unknown metric `{metric_name}`")))?;
    let datasets: Vec<String> = rows.iter().map(|r| r[0].clone()).collect();
    let mut methods = Vec::new();
    let mut scores = Vec::new();
    for m in METHODS {
        let c = col(&format!("{m}_score"))?;
        methods.push(m.to_string());
        scores.push(rows.iter().map(|r| parse_f64(&r[c], m)).collect::<Result<Vec<_>>>()?);
    }
    let meta = read_meta_dataset(&dir.join(METADATASET), metric)?;
    for p in meta.pipelines() {
        let name = pipeline_column(p.learner, p.resampler);
        let mut v = Vec::with_capacity(datasets.len());
        for d in &datasets {
            let row = meta
                .row(d)
                .ok_or_else(|| Error::Format(format!("{METADATASET}: no row for `{d}`")))?;
            v.push(row.score(p, &meta.learners, &meta.resamplers).unwrap_or(metric.sentinel()));
        }
        methods.push(name);
        scores.push(v);
    }
    Ok(ScoreTable {
        metric,
        datasets,
        methods,
        scores,
    })
}

/// Regenerates the summary tables from evaluation artifacts in `dir`:
/// Meta-IR's wins, ties and losses against every other method, the number
/// of datasets on which each method is best, and mean scores.
pub fn report(dir: &Path) -> Result<Vec<String>> {
    let t = read_scores(dir)?;
    let hib = t.metric.higher_is_better();
    let metair = t.methods.iter().position(|m| m == "metair").expect("metair column");

    let mut rows = Vec::new();
    for (i, m) in t.methods.iter().enumerate() {
        if i == metair {
            continue;
        }
        let (w, ti, l) = win_tie_loss(&t.scores[metair], &t.scores[i], hib)?;
        rows.push(vec!["metair".to_string(), m.clone(), w.to_string(), ti.to_string(), l.to_string()]);
    }
    write_csv(&dir.join(WIN_TIE_LOSS), &["method", "versus", "wins", "ties", "losses"], &rows)?;

    // the oracle is excluded: it is best everywhere by definition
    let mut wins = vec![0usize; t.methods.len()];
    for d in 0..t.datasets.len() {
        let mut best: Option<usize> = None;
        for (i, m) in t.methods.iter().enumerate() {
            if m == "oracle" {
                continue;
            }
            if best.is_none_or(|b| t.metric.better(t.scores[i][d], t.scores[b][d])) {
                best = Some(i);
            }
        }
        if let Some(b) = best {
            wins[b] += 1;
        }
    }
    let rows: Vec<Vec<String>> = t
        .methods
        .iter()
        .zip(&wins)
        .filter(|(m, _)| *m != "oracle")
        .map(|(m, w)| vec![m.clone(), w.to_string()])
        .collect();
    write_csv(&dir.join(WINS_BY_METHOD), &["method", "wins"], &rows)?;

    let rows: Vec<Vec<String>> = t
        .methods
        .iter()
        .zip(&t.scores)
        .map(|(m, s)| vec![m.clone(), (s.iter().sum::<f64>() / s.len() as f64).to_string()])
        .collect();
    write_csv(&dir.join(MEAN_SCORES), &["method", "mean_score"], &rows)?;
    Ok(vec![WIN_TIE_LOSS.into(), WINS_BY_METHOD.into(), MEAN_SCORES.into()])
}
