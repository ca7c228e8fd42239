use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use super::{MetaDataset, Pipeline};
use crate::dataset::{derive_seed, rng_from_seed, Dataset};
use crate::error::{Error, Result};
use crate::learners::{fit_classifier, LearnerKind, LearnerSpec, TrainedModel};
use crate::matrix::Matrix;
use crate::meta_features::{extract, MetaFeatureVector, META_FEATURE_NAMES};
use crate::metrics::Metric;
use crate::relevance::RelevanceFunction;
use crate::resampling::ResamplingKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Approach {
    Independent,
    ModelFirst,
    StrategyFirst,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Independent, Approach::ModelFirst, Approach::StrategyFirst];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Independent => "independent",
            Approach::ModelFirst => "model-first",
            Approach::StrategyFirst => "strategy-first",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The pair of meta-classifiers and what is needed to query them.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetaModelBundle {
    pub approach: Approach,
    pub metric: Metric,
    /// Predicts the learner.
    pub lambda_l: TrainedModel,
    /// Predicts the resampling strategy.
    pub lambda_r: TrainedModel,
    /// One-hot order for chained learner labels.
    pub learners: Vec<LearnerKind>,
    /// One-hot order for chained strategy labels.
    pub resamplers: Vec<ResamplingKind>,
}

fn one_hot<S: AsRef<str>>(labels: &[S], classes: &[&str]) -> Vec<Vec<f64>> {
    labels
        .iter()
        .map(|l| classes.iter().map(|c| if *c == l.as_ref() { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn widen(x: &Matrix, extra: &[Vec<f64>]) -> Matrix {
    let width = x.cols() + extra.first().map_or(0, Vec::len);
    let rows: Vec<Vec<f64>> = x
        .iter_rows()
        .zip(extra)
        .map(|(r, e)| r.iter().chain(e).copied().collect())
        .collect();
    Matrix::from_rows(&rows, width).unwrap_or_else(|_| Matrix::zeros(0, width))
}

fn learner_names(kinds: &[LearnerKind]) -> Vec<&'static str> {
    kinds.iter().map(|k| k.name()).collect()
}

fn resampler_names(kinds: &[ResamplingKind]) -> Vec<&'static str> {
    kinds.iter().map(|k| k.name()).collect()
}

/// Trains λ_L and λ_R. The chained approaches append the first
/// classifier's one-hot predictions on its own training rows to the inputs
/// of the second.
pub fn train_meta(m: &MetaDataset, approach: Approach, meta_spec: &LearnerSpec, seed: u64) -> Result<MetaModelBundle> {
    if m.rows.len() < 2 {
        return Err(Error::TooFewMetaRows {
            needed: 2,
            found: m.rows.len(),
        });
    }
    if !meta_spec.kind.is_classifier() {
        return Err(Error::NotAClassifier);
    }
    let x = Matrix::from_rows(
        &m.rows.iter().map(|r| r.features.values()).collect::<Vec<_>>(),
        META_FEATURE_NAMES.len(),
    )?;
    let l_labels: Vec<&str> = m.rows.iter().map(|r| r.best.learner.name()).collect();
    let r_labels: Vec<&str> = m.rows.iter().map(|r| r.best.resampler.name()).collect();
    let spec_l = LearnerSpec {
        seed: derive_seed(seed, &["lambda_L"]),
        ..meta_spec.clone()
    };
    let spec_r = LearnerSpec {
        seed: derive_seed(seed, &["lambda_R"]),
        ..meta_spec.clone()
    };
    let (lambda_l, lambda_r) = match approach {
        Approach::Independent => (
            fit_classifier(&spec_l, &x, &l_labels)?,
            fit_classifier(&spec_r, &x, &r_labels)?,
        ),
        Approach::ModelFirst => {
            let lambda_l = fit_classifier(&spec_l, &x, &l_labels)?;
            let hot = one_hot(&lambda_l.predict_labels(&x)?, &learner_names(&m.learners));
            let lambda_r = fit_classifier(&spec_r, &widen(&x, &hot), &r_labels)?;
            (lambda_l, lambda_r)
        }
        Approach::StrategyFirst => {
            let lambda_r = fit_classifier(&spec_r, &x, &r_labels)?;
            let hot = one_hot(&lambda_r.predict_labels(&x)?, &resampler_names(&m.resamplers));
            let lambda_l = fit_classifier(&spec_l, &widen(&x, &hot), &l_labels)?;
            (lambda_l, lambda_r)
        }
    };
    Ok(MetaModelBundle {
        approach,
        metric: m.metric,
        lambda_l,
        lambda_r,
        learners: m.learners.clone(),
        resamplers: m.resamplers.clone(),
    })
}

impl MetaModelBundle {
    /// Input names of λ_L and λ_R, including chained one-hot columns.
    pub fn input_names(&self) -> (Vec<String>, Vec<String>) {
        let base: Vec<String> = META_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
        let with = |prefix: &str, names: Vec<&str>| {
            let mut v = base.clone();
            v.extend(names.into_iter().map(|n| format!("{prefix}={n}")));
            v
        };
        match self.approach {
            Approach::Independent => (base.clone(), base),
            Approach::ModelFirst => (base.clone(), with("learner", learner_names(&self.learners))),
            Approach::StrategyFirst => (with("strategy", resampler_names(&self.resamplers)), base),
        }
    }

    /// Gini importance of λ_L and λ_R, paired with input names.
    pub fn importances(&self) -> (Vec<(String, f64)>, Vec<(String, f64)>) {
        let (nl, nr) = self.input_names();
        (
            nl.into_iter().zip(self.lambda_l.feature_importance()).collect(),
            nr.into_iter().zip(self.lambda_r.feature_importance()).collect(),
        )
    }

    fn learner_from(&self, label: &str) -> Result<LearnerKind> {
        LearnerKind::from_name(label).ok_or_else(|| Error::UnknownName(label.to_string()))
    }

    fn resampler_from(&self, label: &str) -> Result<ResamplingKind> {
        ResamplingKind::from_name(label).ok_or_else(|| Error::UnknownName(label.to_string()))
    }
}

fn single_label(m: &TrainedModel, x: &Matrix) -> Result<String> {
    m.predict_labels(x)?.into_iter().next().ok_or(Error::EmptyInput)
}

/// Recommendation from an already extracted meta-feature vector.
pub fn recommend_from_features(features: &MetaFeatureVector, bundle: &MetaModelBundle) -> Result<Pipeline> {
    let x = Matrix::from_rows(&[features.values()], META_FEATURE_NAMES.len())?;
    let (l, r) = match bundle.approach {
        Approach::Independent => (single_label(&bundle.lambda_l, &x)?, single_label(&bundle.lambda_r, &x)?),
        Approach::ModelFirst => {
            let l = single_label(&bundle.lambda_l, &x)?;
            let hot = one_hot(&[l.as_str()], &learner_names(&bundle.learners));
            (l, single_label(&bundle.lambda_r, &widen(&x, &hot))?)
        }
        Approach::StrategyFirst => {
            let r = single_label(&bundle.lambda_r, &x)?;
            let hot = one_hot(&[r.as_str()], &resampler_names(&bundle.resamplers));
            (single_label(&bundle.lambda_l, &widen(&x, &hot))?, r)
        }
    };
    Ok(Pipeline::new(bundle.resampler_from(&r)?, bundle.learner_from(&l)?))
}

/// Zero-shot recommendation for `g`: only its meta-features are computed;
/// no candidate pipeline is trained or evaluated.
pub fn recommend(g: &Dataset, bundle: &MetaModelBundle) -> Result<Pipeline> {
    let f = RelevanceFunction::from_target(g.target())?;
    recommend_from_features(&extract(g, &f)?, bundle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Baseline {
    Random,
    Majority,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::Majority => "majority",
        }
    }
}

/// Random draws learner and strategy uniformly from the registered kinds;
/// Majority takes the modal labels of `m`, ties to the smallest name.
pub fn baseline_recommend(kind: Baseline, m: &MetaDataset, seed: u64) -> Result<Pipeline> {
    if m.learners.is_empty() || m.resamplers.is_empty() {
        return Err(Error::EmptyInput);
    }
    match kind {
        Baseline::Random => {
            let mut rng = rng_from_seed(seed);
            let l = m.learners[rng.random_range(0..m.learners.len())];
            let r = m.resamplers[rng.random_range(0..m.resamplers.len())];
            Ok(Pipeline::new(r, l))
        }
        Baseline::Majority => {
            if m.rows.is_empty() {
                return Err(Error::EmptyInput);
            }
            let l = mode(m.rows.iter().map(|r| r.best.learner.name()));
            let r = mode(m.rows.iter().map(|r| r.best.resampler.name()));
            Ok(Pipeline::new(
                ResamplingKind::from_name(r).ok_or_else(|| Error::UnknownName(r.to_string()))?,
                LearnerKind::from_name(l).ok_or_else(|| Error::UnknownName(l.to_string()))?,
            ))
        }
    }
}

/// Most frequent item; the smallest one among equals.
fn mode<'a>(items: impl Iterator<Item = &'a str>) -> &'a str {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for i in items {
        *counts.entry(i).or_default() += 1;
    }
    let mut best = ("", 0);
    for (k, c) in counts {
        if c > best.1 {
            best = (k, c);
        }
    }
    best.0
}
