use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{
    baseline_recommend, build_meta_dataset, recommend_from_features, train_meta, Approach, Baseline, Executor,
    GridSpec, MetaDataset, Pipeline,
};
use crate::dataset::{derive_seed, Dataset};
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::metrics::{accuracy, f1_macro, Metric};

/// A method's pick for one held-out dataset and its grid score there.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MethodScores {
    pub pipeline: Pipeline,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LodoRow {
    pub dataset: String,
    pub oracle: MethodScores,
    pub metair: MethodScores,
    pub random: MethodScores,
    pub majority: MethodScores,
    /// Datasets whose rows trained this round's meta-classifiers.
    pub training_datasets: Vec<String>,
}

/// Agreement of a method's labels with the oracle labels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetaLevelScores {
    pub method: String,
    pub f1_macro_learner: f64,
    pub f1_macro_resampler: f64,
    pub accuracy_learner: f64,
    pub accuracy_resampler: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LodoReport {
    pub approach: Approach,
    pub metric: Metric,
    /// The full meta-dataset, including every dataset's score grid.
    pub meta: MetaDataset,
    pub rows: Vec<LodoRow>,
    /// Meta-IR, random and majority, in that order.
    pub meta_level: Vec<MetaLevelScores>,
    /// Importance of each λ_L input for a bundle trained on every row.
    pub importance_learner: Vec<(String, f64)>,
    pub importance_resampler: Vec<(String, f64)>,
}

impl LodoReport {
    /// Mean base-level score of oracle, Meta-IR, random and majority.
    pub fn mean_scores(&self) -> [(&'static str, f64); 4] {
        let n = self.rows.len().max(1) as f64;
        let mean = |f: fn(&LodoRow) -> f64| self.rows.iter().map(f).sum::<f64>() / n;
        [
            ("oracle", mean(|r| r.oracle.score)),
            ("metair", mean(|r| r.metair.score)),
            ("random", mean(|r| r.random.score)),
            ("majority", mean(|r| r.majority.score)),
        ]
    }
}

fn meta_level(method: &str, rows: &[LodoRow], pick: fn(&LodoRow) -> Pipeline) -> Result<MetaLevelScores> {
    let true_l: Vec<&str> = rows.iter().map(|r| r.oracle.pipeline.learner.name()).collect();
    let true_r: Vec<&str> = rows.iter().map(|r| r.oracle.pipeline.resampler.name()).collect();
    let pred_l: Vec<&str> = rows.iter().map(|r| pick(r).learner.name()).collect();
    let pred_r: Vec<&str> = rows.iter().map(|r| pick(r).resampler.name()).collect();
    Ok(MetaLevelScores {
        method: method.to_string(),
        f1_macro_learner: f1_macro(&true_l, &pred_l)?,
        f1_macro_resampler: f1_macro(&true_r, &pred_r)?,
        accuracy_learner: accuracy(&true_l, &pred_l)?,
        accuracy_resampler: accuracy(&true_r, &pred_r)?,
    })
}

/// Leave-one-dataset-out: for each dataset, meta-classifiers trained on the
/// other rows recommend a pipeline whose score is read from the held-out
/// dataset's grid, next to the oracle and the two baselines.
pub fn lodo_evaluate<E: Executor>(
    corpus: &[Dataset],
    grid: &GridSpec,
    approach: Approach,
    meta_spec: &LearnerSpec,
    master_seed: u64,
    exec: &E,
) -> Result<LodoReport> {
    if corpus.len() < 3 {
        return Err(Error::TooFewMetaRows {
            needed: 3,
            found: corpus.len(),
        });
    }
    let meta = build_meta_dataset(corpus, grid, master_seed, exec)?;
    if meta.rows.len() < 3 {
        return Err(Error::TooFewMetaRows {
            needed: 3,
            found: meta.rows.len(),
        });
    }
    let lookup = |name: &str, p: Pipeline| -> MethodScores {
        let row = meta.row(name);
        let score = row
            .and_then(|r| r.score(p, &meta.learners, &meta.resamplers))
            .unwrap_or(grid.metric.sentinel());
        MethodScores { pipeline: p, score }
    };
    let names: Vec<String> = meta.rows.iter().map(|r| r.dataset.clone()).collect();
    let rounds = exec.map(names, |name: String| -> Result<LodoRow> {
        let held = meta.row(&name).ok_or(Error::EmptyInput)?;
        let train = meta.without(&[name.as_str()]);
        let bundle = train_meta(&train, approach, meta_spec, derive_seed(master_seed, &["lodo", name.as_str()]))?;
        let picked = recommend_from_features(&held.features, &bundle)?;
        let random = baseline_recommend(Baseline::Random, &train, derive_seed(master_seed, &["random", name.as_str()]))?;
        let majority = baseline_recommend(Baseline::Majority, &train, 0)?;
        Ok(LodoRow {
            oracle: lookup(&name, held.best),
            metair: lookup(&name, picked),
            random: lookup(&name, random),
            majority: lookup(&name, majority),
            training_datasets: train.rows.iter().map(|r| r.dataset.clone()).collect(),
            dataset: name,
        })
    });
    let mut rows = Vec::with_capacity(rounds.len());
    for r in rounds {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => log::warn!("lodo round skipped: {e}"),
        }
    }
    if rows.is_empty() {
        return Err(Error::AllDatasetsFailed);
    }
    let meta_level = alloc::vec![
        meta_level("metair", &rows, |r| r.metair.pipeline)?,
        meta_level("random", &rows, |r| r.random.pipeline)?,
        meta_level("majority", &rows, |r| r.majority.pipeline)?,
    ];
    let full = train_meta(&meta, approach, meta_spec, derive_seed(master_seed, &["full"]))?;
    let (importance_learner, importance_resampler) = full.importances();
    Ok(LodoReport {
        approach,
        metric: grid.metric,
        meta,
        rows,
        meta_level,
        importance_learner,
        importance_resampler,
    })
}

/// Wins, ties and losses of `a` against `b`, comparing element by element
/// with exact ties.
pub fn win_tie_loss(a: &[f64], b: &[f64], higher_is_better: bool) -> Result<(usize, usize, usize)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut out = (0, 0, 0);
    for (x, y) in a.iter().zip(b) {
        if x == y {
            out.1 += 1;
        } else if (x > y) == higher_is_better {
            out.0 += 1;
        } else {
            out.2 += 1;
        }
    }
    Ok(out)
}
