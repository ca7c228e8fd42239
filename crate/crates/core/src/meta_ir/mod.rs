//! Pipeline grids, the meta-dataset, meta-classifier training under the
//! Independent / ModelFirst / StrategyFirst approaches, zero-shot
//! recommendation and leave-one-dataset-out evaluation.

mod lodo;
mod train;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use lodo::{lodo_evaluate, win_tie_loss, LodoReport, LodoRow, MetaLevelScores, MethodScores};
pub use train::{
    baseline_recommend, recommend, recommend_from_features, train_meta, Approach, Baseline, MetaModelBundle,
};

use crate::dataset::{derive_seed, split_holdout, Dataset};
use crate::error::{invalid, Error, Result};
use crate::learners::{fit_regressor, LearnerKind, LearnerSpec};
use crate::meta_features::{extract, MetaFeatureVector};
use crate::metrics::Metric;
use crate::relevance::{check_threshold, RelevanceFunction};
use crate::resampling::{apply, ResamplingKind, ResamplingSpec, DEFAULT_THRESHOLD};

pub const DEFAULT_TEST_FRACTION: f64 = 0.25;

/// One (resampling strategy, learning model) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pipeline {
    pub resampler: ResamplingKind,
    pub learner: LearnerKind,
}

impl Pipeline {
    pub fn new(resampler: ResamplingKind, learner: LearnerKind) -> Self {
        Pipeline { resampler, learner }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "strategy={} learner={}", self.resampler, self.learner)
    }
}

/// Runs independent jobs, possibly in parallel. Results must come back in
/// input order.
pub trait Executor: Sync {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_iter().map(f).collect()
    }
}

/// The candidate pipelines and how they are scored.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    /// Learner templates; seeds are replaced per cell.
    pub learners: Vec<LearnerSpec>,
    /// Strategy templates; seeds and thresholds are replaced per cell.
    pub resamplers: Vec<ResamplingSpec>,
    pub metric: Metric,
    pub t_r: f64,
    pub test_fraction: f64,
}

impl GridSpec {
    /// Default hyperparameters for the given kinds.
    pub fn new(learners: &[LearnerKind], resamplers: &[ResamplingKind], metric: Metric) -> Self {
        GridSpec {
            learners: learners.iter().map(|&k| LearnerSpec::new(k)).collect(),
            resamplers: resamplers.iter().map(|&k| ResamplingSpec::new(k)).collect(),
            metric,
            t_r: DEFAULT_THRESHOLD,
            test_fraction: DEFAULT_TEST_FRACTION,
        }
    }

    /// All four regressors and all seven strategies.
    pub fn full(metric: Metric) -> Self {
        Self::new(&LearnerKind::REGRESSORS, &ResamplingKind::ALL, metric)
    }

    pub fn learner_kinds(&self) -> Vec<LearnerKind> {
        self.learners.iter().map(|l| l.kind).collect()
    }

    pub fn resampler_kinds(&self) -> Vec<ResamplingKind> {
        self.resamplers.iter().map(|r| r.kind).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(invalid("learners", "at least one is required"));
        }
        if self.resamplers.is_empty() {
            return Err(invalid("resamplers", "at least one is required"));
        }
        check_threshold(self.t_r)?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(invalid("test_fraction", "must lie in (0, 1)"));
        }
        for l in &self.learners {
            if !l.kind.is_regressor() {
                return Err(Error::WrongLearnerKind(l.kind.name()));
            }
            l.validate()?;
        }
        for r in &self.resamplers {
            r.validate()?;
        }
        let mut kinds = self.learner_kinds();
        kinds.sort();
        kinds.dedup();
        if kinds.len() != self.learners.len() {
            return Err(invalid("learners", "duplicate kind"));
        }
        let mut kinds = self.resampler_kinds();
        kinds.sort();
        kinds.dedup();
        if kinds.len() != self.resamplers.len() {
            return Err(invalid("resamplers", "duplicate kind"));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.learners.len() * self.resamplers.len()
    }
}

/// Seeds for one dataset's grid; keyed on the dataset name so corpus order
/// never matters.
fn split_seed(master: u64, name: &str) -> u64 {
    derive_seed(master, &[name, "split"])
}

fn resample_seed(master: u64, name: &str, r: ResamplingKind) -> u64 {
    derive_seed(master, &[name, "resample", r.name()])
}

fn learn_seed(master: u64, name: &str, l: LearnerKind, r: ResamplingKind) -> u64 {
    derive_seed(master, &[name, "learn", l.name(), r.name()])
}

/// Learner-major score table, `scores[l * |R| + r]`, holding sentinels for
/// pipelines that could not run.
fn score_grid(d: &Dataset, grid: &GridSpec, master_seed: u64) -> Result<Vec<f64>> {
    let name = d.name();
    let metric = grid.metric;
    let split = split_holdout(d, grid.test_fraction, split_seed(master_seed, name))?;
    let eval_f = RelevanceFunction::from_target(d.target())?;
    let train_f = RelevanceFunction::from_target(split.train.target());
    let mut scores = alloc::vec![metric.sentinel(); grid.cells()];
    let nr = grid.resamplers.len();
    for (ri, template) in grid.resamplers.iter().enumerate() {
        let spec = ResamplingSpec {
            t_r: grid.t_r,
            seed: resample_seed(master_seed, name, template.kind),
            ..*template
        };
        let resampled = match (&train_f, spec.kind) {
            (_, ResamplingKind::None) => Ok(split.train.clone()),
            (Ok(f), _) => apply(&spec, &split.train, f),
            (Err(e), _) => Err(e.clone()),
        };
        let train = match resampled {
            Ok(t) => t,
            Err(e) => {
                log::warn!("{name}: {} skipped: {e}", spec.kind);
                continue;
            }
        };
        for (li, ltemplate) in grid.learners.iter().enumerate() {
            let lspec = LearnerSpec {
                seed: learn_seed(master_seed, name, ltemplate.kind, spec.kind),
                ..ltemplate.clone()
            };
            let outcome = fit_regressor(&lspec, &train)
                .and_then(|m| m.predict(split.test.features()))
                .and_then(|pred| metric.evaluate(split.test.target(), &pred, &eval_f, grid.t_r));
            match outcome {
                Ok(s) if s.is_finite() => scores[li * nr + ri] = s,
                Ok(_) => log::warn!("{name}: {} + {} gave a non-finite score", spec.kind, lspec.kind),
                Err(e) => log::warn!("{name}: {} + {} failed: {e}", spec.kind, lspec.kind),
            }
        }
    }
    Ok(scores)
}

/// Score of one pipeline on `d`: holdout split, relevance from the training
/// targets, resampling of the training part only, then the metric on the
/// untouched test part with relevance from the full target. Failures score
/// the metric's sentinel.
pub fn evaluate_pipeline(d: &Dataset, p: Pipeline, grid: &GridSpec, master_seed: u64) -> Result<f64> {
    let learner = grid
        .learners
        .iter()
        .find(|l| l.kind == p.learner)
        .cloned()
        .unwrap_or_else(|| LearnerSpec::new(p.learner));
    let resampler = grid
        .resamplers
        .iter()
        .find(|r| r.kind == p.resampler)
        .copied()
        .unwrap_or_else(|| ResamplingSpec::new(p.resampler));
    let single = GridSpec {
        learners: alloc::vec![learner],
        resamplers: alloc::vec![resampler],
        ..grid.clone()
    };
    single.validate()?;
    Ok(score_grid(d, &single, master_seed)?[0])
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetaRow {
    pub dataset: String,
    pub features: MetaFeatureVector,
    pub best: Pipeline,
    /// Learner-major grid aligned with the meta-dataset's kind lists.
    pub scores: Vec<f64>,
}

impl MetaRow {
    pub fn score(&self, p: Pipeline, learners: &[LearnerKind], resamplers: &[ResamplingKind]) -> Option<f64> {
        let li = learners.iter().position(|&l| l == p.learner)?;
        let ri = resamplers.iter().position(|&r| r == p.resampler)?;
        self.scores.get(li * resamplers.len() + ri).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetaDataset {
    pub learners: Vec<LearnerKind>,
    pub resamplers: Vec<ResamplingKind>,
    pub metric: Metric,
    /// Sorted by dataset name.
    pub rows: Vec<MetaRow>,
    /// Datasets left out, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl MetaDataset {
    pub fn pipelines(&self) -> Vec<Pipeline> {
        self.learners
            .iter()
            .flat_map(|&l| self.resamplers.iter().map(move |&r| Pipeline::new(r, l)))
            .collect()
    }

    pub fn row(&self, name: &str) -> Option<&MetaRow> {
        self.rows.iter().find(|r| r.dataset == name)
    }

    /// The same meta-dataset without the named rows.
    pub fn without(&self, names: &[&str]) -> MetaDataset {
        MetaDataset {
            rows: self
                .rows
                .iter()
                .filter(|r| !names.contains(&r.dataset.as_str()))
                .cloned()
                .collect(),
            skipped: Vec::new(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> MetaDataset {
        MetaDataset {
            learners: self.learners.clone(),
            resamplers: self.resamplers.clone(),
            metric: self.metric,
            rows: Vec::new(),
            skipped: Vec::new(),
        }
    }
}

/// Best cell of a learner-major grid: highest F1R or lowest SERA, ties to
/// the lexicographically smallest (learner, resampler) names. `None` when
/// every cell holds the sentinel.
pub fn best_pipeline(
    scores: &[f64],
    learners: &[LearnerKind],
    resamplers: &[ResamplingKind],
    metric: Metric,
) -> Option<Pipeline> {
    let mut cells: Vec<(usize, usize)> = (0..learners.len())
        .flat_map(|l| (0..resamplers.len()).map(move |r| (l, r)))
        .collect();
    cells.sort_by(|a, b| (learners[a.0].name(), resamplers[a.1].name()).cmp(&(learners[b.0].name(), resamplers[b.1].name())));
    let mut best: Option<(usize, usize, f64)> = None;
    for (l, r) in cells {
        let s = scores[l * resamplers.len() + r];
        if s == metric.sentinel() || !s.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, _, b)| metric.better(s, b)) {
            best = Some((l, r, s));
        }
    }
    best.map(|(l, r, _)| Pipeline::new(resamplers[r], learners[l]))
}

/// Grid, best pipeline and meta-features for one dataset.
pub fn meta_row(d: &Dataset, grid: &GridSpec, master_seed: u64) -> Result<MetaRow> {
    d.check_invariants()?;
    let scores = score_grid(d, grid, master_seed)?;
    let best = best_pipeline(&scores, &grid.learner_kinds(), &grid.resampler_kinds(), grid.metric)
        .ok_or_else(|| Error::InvalidDataset("every pipeline failed".to_string()))?;
    let f = RelevanceFunction::from_target(d.target())?;
    Ok(MetaRow {
        dataset: d.name().to_string(),
        features: extract(d, &f)?,
        best,
        scores,
    })
}

/// Evaluates every pipeline on every dataset and labels each row with its
/// best pipeline. Failing datasets are skipped and listed.
pub fn build_meta_dataset<E: Executor>(
    corpus: &[Dataset],
    grid: &GridSpec,
    master_seed: u64,
    exec: &E,
) -> Result<MetaDataset> {
    grid.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut names: Vec<&str> = corpus.iter().map(|d| d.name()).collect();
    names.sort();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("corpus", "dataset names must be unique"));
    }
    let results = exec.map(corpus.iter().collect(), |d: &Dataset| {
        (d.name().to_string(), meta_row(d, grid, master_seed))
    });
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (name, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::warn!("{name}: dataset skipped: {e}");
                skipped.push((name, format!("{e}")));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::AllDatasetsFailed);
    }
    rows.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    skipped.sort();
    Ok(MetaDataset {
        learners: grid.learner_kinds(),
        resamplers: grid.resampler_kinds(),
        metric: grid.metric,
        rows,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Duplicated rows so every test row also appears in training.
    fn memorisable(name: &str) -> Dataset {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..6 {
            for i in 0..20 {
                rows.push([i as f64]);
                y.push(if i >= 18 { 100.0 + i as f64 } else { i as f64 });
            }
        }
        Dataset::from_rows(name, &rows, &y).unwrap()
    }

    #[test]
    fn memorised_pipeline_scores_one() {
        let d = memorisable("mem");
        let mut grid = GridSpec::new(&[LearnerKind::DT], &[ResamplingKind::None], Metric::F1R);
        grid.learners[0].min_leaf = 1;
        let p = Pipeline::new(ResamplingKind::None, LearnerKind::DT);
        assert_eq!(evaluate_pipeline(&d, p, &grid, 1).unwrap(), 1.0);
        assert_eq!(evaluate_pipeline(&d, p, &grid, 1).unwrap(), evaluate_pipeline(&d, p, &grid, 1).unwrap());
    }

    #[test]
    fn unmet_preconditions_give_the_sentinel() {
        // every training row rare once t_r is 0, so RU has nothing to drop
        let d = memorisable("all-rare");
        let mut grid = GridSpec::new(&[LearnerKind::DT], &[ResamplingKind::RandomUnder], Metric::F1R);
        grid.t_r = 0.0;
        let p = Pipeline::new(ResamplingKind::RandomUnder, LearnerKind::DT);
        assert_eq!(evaluate_pipeline(&d, p, &grid, 3).unwrap(), -1.0);
        grid.metric = Metric::Sera;
        assert_eq!(evaluate_pipeline(&d, p, &grid, 3).unwrap(), f64::INFINITY);
    }

    #[test]
    fn singleton_grid_meta_dataset() {
        let d = memorisable("one");
        let grid = GridSpec::new(&[LearnerKind::DT], &[ResamplingKind::None], Metric::F1R);
        let m = build_meta_dataset(&[d], &grid, 5, &Sequential).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].best, Pipeline::new(ResamplingKind::None, LearnerKind::DT));
        assert_eq!(m.rows[0].scores.len(), 1);
    }

    #[test]
    fn best_pipeline_ties_and_direction() {
        let learners = [LearnerKind::RF, LearnerKind::DT];
        let resamplers = [ResamplingKind::Wercs, ResamplingKind::RandomOver];
        let scores = [0.5, 0.7, 0.7, 0.2];
        // (RF, RO) and (DT, WERCS) tie; DT sorts first
        assert_eq!(
            best_pipeline(&scores, &learners, &resamplers, Metric::F1R),
            Some(Pipeline::new(ResamplingKind::Wercs, LearnerKind::DT))
        );
        assert_eq!(
            best_pipeline(&scores, &learners, &resamplers, Metric::Sera),
            Some(Pipeline::new(ResamplingKind::RandomOver, LearnerKind::DT))
        );
        assert_eq!(best_pipeline(&[-1.0; 4], &learners, &resamplers, Metric::F1R), None);
    }

    #[test]
    fn grid_validation() {
        let mut g = GridSpec::full(Metric::F1R);
        assert!(g.validate().is_ok());
        assert_eq!(g.cells(), 28);
        g.learners.push(LearnerSpec::new(LearnerKind::RfClf));
        assert!(g.validate().is_err());
        let g = GridSpec::new(&[LearnerKind::DT, LearnerKind::DT], &[ResamplingKind::None], Metric::F1R);
        assert!(g.validate().is_err());
        assert!(build_meta_dataset(&[], &GridSpec::full(Metric::F1R), 0, &Sequential).is_err());
    }

    #[test]
    fn constant_dataset_is_skipped_and_all_failures_error() {
        let bad = Dataset::from_rows("flat", &[[1.0], [2.0], [3.0], [4.0]], &[2.0; 4]).unwrap();
        let grid = GridSpec::new(&[LearnerKind::DT], &[ResamplingKind::None], Metric::F1R);
        assert_eq!(
            build_meta_dataset(&[bad.clone()], &grid, 0, &Sequential),
            Err(Error::AllDatasetsFailed)
        );
        let m = build_meta_dataset(&[bad, memorisable("ok")], &grid, 0, &Sequential).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.skipped.len(), 1);
        assert_eq!(m.skipped[0].0, "flat");
    }
}
