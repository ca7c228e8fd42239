//! Tree-based regressors for the base level and classifiers for the meta
//! level, with impurity-based feature importance.

mod tree;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;

pub use tree::{Node, Tree};
use tree::{grow, GrowParams, Labels};

use crate::dataset::{derive_seed, rng_from_seed, Dataset};
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

static REGRESSOR_FITS: AtomicUsize = AtomicUsize::new(0);

/// Number of regressor fits performed by this process.
pub fn regressor_fit_count() -> usize {
    REGRESSOR_FITS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LearnerKind {
    DT,
    BG,
    RF,
    GBT,
    RfClf,
    DtClf,
}

impl LearnerKind {
    pub const REGRESSORS: [LearnerKind; 4] = [LearnerKind::BG, LearnerKind::DT, LearnerKind::GBT, LearnerKind::RF];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::DT => "DT",
            LearnerKind::BG => "BG",
            LearnerKind::RF => "RF",
            LearnerKind::GBT => "GBT",
            LearnerKind::RfClf => "RF_CLF",
            LearnerKind::DtClf => "DT_CLF",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        [
            LearnerKind::DT,
            LearnerKind::BG,
            LearnerKind::RF,
            LearnerKind::GBT,
            LearnerKind::RfClf,
            LearnerKind::DtClf,
        ]
        .into_iter()
        .find(|k| k.name() == up)
    }

    pub fn is_regressor(self) -> bool {
        !self.is_classifier()
    }

    pub fn is_classifier(self) -> bool {
        matches!(self, LearnerKind::RfClf | LearnerKind::DtClf)
    }

    fn single_tree(self) -> bool {
        matches!(self, LearnerKind::DT | LearnerKind::DtClf)
    }

    fn bootstrap(self) -> bool {
        matches!(self, LearnerKind::BG | LearnerKind::RF | LearnerKind::RfClf)
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How many features each split examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FeatureSubsample {
    All,
    /// ⌈√d⌉ features drawn uniformly per split.
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// Ignored by the single-tree kinds.
    pub trees: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: FeatureSubsample,
    /// GBT shrinkage.
    pub learning_rate: f64,
    pub seed: u64,
}

impl LearnerSpec {
    /// Default hyperparameters for `kind`.
    pub fn new(kind: LearnerKind) -> Self {
        let (trees, max_depth, min_leaf, max_features) = match kind {
            LearnerKind::DT => (1, None, 5, FeatureSubsample::All),
            LearnerKind::BG => (100, None, 5, FeatureSubsample::All),
            LearnerKind::RF => (100, None, 5, FeatureSubsample::Sqrt),
            LearnerKind::GBT => (100, Some(3), 1, FeatureSubsample::All),
            LearnerKind::RfClf => (500, None, 1, FeatureSubsample::Sqrt),
            LearnerKind::DtClf => (1, None, 1, FeatureSubsample::All),
        };
        LearnerSpec {
            kind,
            trees,
            max_depth,
            min_leaf,
            max_features,
            learning_rate: 0.1,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(invalid("trees", "must be at least 1"));
        }
        if self.max_depth == Some(0) {
            return Err(invalid("max_depth", "must be at least 1"));
        }
        if self.min_leaf == 0 {
            return Err(invalid("min_leaf", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(invalid("learning_rate", "must lie in (0, 1]"));
        }
        Ok(())
    }

    fn tree_count(&self) -> usize {
        if self.kind.single_tree() {
            1
        } else {
            self.trees
        }
    }

    fn grow_params(&self, d: usize) -> GrowParams {
        let max_features = match self.max_features {
            FeatureSubsample::All => d,
            FeatureSubsample::Sqrt => libm::ceil(libm::sqrt(d as f64)) as usize,
        };
        GrowParams {
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            max_features: max_features.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
enum Fitted {
    Average(Vec<Tree>),
    Boosted {
        init: f64,
        trees: Vec<Tree>,
        /// Training MSE before boosting and after each stage.
        train_loss: Vec<f64>,
    },
    Vote {
        classes: Vec<String>,
        trees: Vec<Tree>,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainedModel {
    spec: LearnerSpec,
    feature_names: Vec<String>,
    fitted: Fitted,
    /// Raw impurity decreases per feature, averaged over trees.
    importance: Vec<f64>,
}

pub fn fit_regressor(spec: &LearnerSpec, train: &Dataset) -> Result<TrainedModel> {
    if !spec.kind.is_regressor() {
        return Err(Error::WrongLearnerKind(spec.kind.name()));
    }
    spec.validate()?;
    if train.n() == 0 {
        return Err(Error::EmptyInput);
    }
    REGRESSOR_FITS.fetch_add(1, Ordering::Relaxed);
    let x = train.features();
    let y = train.target();
    let (n, d) = (x.rows(), x.cols());
    let params = spec.grow_params(d);
    let mut importance = alloc::vec![0.0; d];
    let fitted = if spec.kind == LearnerKind::GBT {
        let init = y.iter().sum::<f64>() / n as f64;
        let mut pred = alloc::vec![init; n];
        let mse = |p: &[f64]| p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64;
        let mut train_loss = alloc::vec![mse(&pred)];
        let mut trees = Vec::with_capacity(spec.trees);
        for t in 0..spec.trees {
            let residual: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
            let mut rng = rng_from_seed(tree_seed(spec.seed, t));
            let mut sample: Vec<usize> = (0..n).collect();
            let tree = grow(x, Labels::Real(&residual), &mut sample, params, &mut rng, &mut importance);
            for (i, p) in pred.iter_mut().enumerate() {
                *p += spec.learning_rate * tree.predict_row(x.row(i));
            }
            train_loss.push(mse(&pred));
            trees.push(tree);
        }
        Fitted::Boosted { init, trees, train_loss }
    } else {
        Fitted::Average(grow_forest(spec, x, Labels::Real(y), params, &mut importance))
    };
    let count = spec.tree_count() as f64;
    importance.iter_mut().for_each(|v| *v /= count);
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: train.feature_names().to_vec(),
        fitted,
        importance,
    })
}

pub fn fit_classifier<S: AsRef<str>>(spec: &LearnerSpec, features: &Matrix, labels: &[S]) -> Result<TrainedModel> {
    if !spec.kind.is_classifier() {
        return Err(Error::WrongLearnerKind(spec.kind.name()));
    }
    spec.validate()?;
    if features.rows() == 0 || features.cols() == 0 {
        return Err(Error::EmptyInput);
    }
    if labels.len() != features.rows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: features.rows(),
        });
    }
    if features.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDataset("non-finite feature value".into()));
    }
    let classes: Vec<String> = labels
        .iter()
        .map(|l| l.as_ref())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    let codes: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search_by(|c| c.as_str().cmp(l.as_ref())).unwrap_or(0))
        .collect();
    let d = features.cols();
    let params = spec.grow_params(d);
    let mut importance = alloc::vec![0.0; d];
    let trees = grow_forest(spec, features, Labels::Class(&codes, classes.len()), params, &mut importance);
    let count = spec.tree_count() as f64;
    importance.iter_mut().for_each(|v| *v /= count);
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: (1..=d).map(|j| format!("x{j}")).collect(),
        fitted: Fitted::Vote { classes, trees },
        importance,
    })
}

fn tree_seed(seed: u64, t: usize) -> u64 {
    derive_seed(seed, &["tree".to_string(), t.to_string()])
}

fn grow_forest(
    spec: &LearnerSpec,
    x: &Matrix,
    labels: Labels<'_>,
    params: GrowParams,
    importance: &mut [f64],
) -> Vec<Tree> {
    let n = x.rows();
    (0..spec.tree_count())
        .map(|t| {
            let mut rng = rng_from_seed(tree_seed(spec.seed, t));
            let mut sample: Vec<usize> = if spec.kind.bootstrap() {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(x, labels, &mut sample, params, &mut rng, importance)
        })
        .collect()
}

impl TrainedModel {
    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn trees(&self) -> &[Tree] {
        match &self.fitted {
            Fitted::Average(t) | Fitted::Boosted { trees: t, .. } | Fitted::Vote { trees: t, .. } => t,
        }
    }

    /// Class labels in sorted order; empty for regressors.
    pub fn classes(&self) -> &[String] {
        match &self.fitted {
            Fitted::Vote { classes, .. } => classes,
            _ => &[],
        }
    }

    /// Training MSE before boosting and after each stage (GBT only).
    pub fn staged_train_loss(&self) -> Option<&[f64]> {
        match &self.fitted {
            Fitted::Boosted { train_loss, .. } => Some(train_loss),
            _ => None,
        }
    }

    fn check_schema(&self, x: &Matrix) -> Result<()> {
        if x.rows() > 0 && x.cols() != self.n_features() {
            return Err(Error::SchemaMismatch {
                expected: self.n_features(),
                found: x.cols(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.check_schema(x)?;
        match &self.fitted {
            Fitted::Average(trees) => Ok(x
                .iter_rows()
                .map(|r| trees.iter().map(|t| t.predict_row(r)).sum::<f64>() / trees.len() as f64)
                .collect()),
            Fitted::Boosted { init, trees, .. } => {
                let rate = self.spec.learning_rate;
                Ok(x.iter_rows()
                    .map(|r| trees.iter().fold(*init, |acc, t| acc + rate * t.predict_row(r)))
                    .collect())
            }
            Fitted::Vote { .. } => Err(Error::WrongLearnerKind(self.spec.kind.name())),
        }
    }

    /// Row-by-tree raw outputs of an averaging regressor.
    pub fn tree_predictions(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        self.check_schema(x)?;
        match &self.fitted {
            Fitted::Average(trees) => Ok(x
                .iter_rows()
                .map(|r| trees.iter().map(|t| t.predict_row(r)).collect())
                .collect()),
            _ => Err(Error::WrongLearnerKind(self.spec.kind.name())),
        }
    }

    /// Majority vote; ties go to the lexicographically smallest label.
    pub fn predict_labels(&self, x: &Matrix) -> Result<Vec<String>> {
        self.check_schema(x)?;
        let Fitted::Vote { classes, trees } = &self.fitted else {
            return Err(Error::NotAClassifier);
        };
        let mut votes = alloc::vec![0usize; classes.len()];
        Ok(x.iter_rows()
            .map(|r| {
                votes.iter_mut().for_each(|v| *v = 0);
                for t in trees {
                    votes[t.predict_row(r) as usize] += 1;
                }
                let mut best = 0;
                for (j, &v) in votes.iter().enumerate() {
                    if v > votes[best] {
                        best = j;
                    }
                }
                classes[best].clone()
            })
            .collect())
    }

    /// Impurity decrease per feature, normalised to sum to 1; all zeros
    /// when no split was made.
    pub fn feature_importance(&self) -> Vec<f64> {
        let total: f64 = self.importance.iter().sum();
        if total <= 0.0 {
            return alloc::vec![0.0; self.importance.len()];
        }
        self.importance.iter().map(|v| v / total).collect()
    }
}

/// Gini importance of a fitted classifier.
pub fn gini_importance(m: &TrainedModel) -> Result<Vec<f64>> {
    if !m.spec.kind.is_classifier() {
        return Err(Error::NotAClassifier);
    }
    Ok(m.feature_importance())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn step_data() -> Dataset {
        let rows: Vec<[f64; 1]> = (0..200).map(|i| [(i as f64 - 99.5) / 10.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| if r[0] > 0.0 { 1.0 } else { 0.0 }).collect();
        Dataset::from_rows("step", &rows, &y).unwrap()
    }

    fn mse(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
    }

    #[test]
    fn single_row_dt_is_constant() {
        let d = Dataset::from_rows("one", &[[1.0, 2.0]], &[7.5]).unwrap();
        let m = fit_regressor(&LearnerSpec::new(LearnerKind::DT), &d).unwrap();
        let q = Matrix::from_rows(&[[0.0, 0.0], [100.0, -3.0]], 2).unwrap();
        assert_eq!(m.predict(&q).unwrap(), vec![7.5, 7.5]);
    }

    #[test]
    fn constant_target_gives_constant_predictor() {
        let rows: Vec<[f64; 2]> = (0..30).map(|i| [i as f64, (i * 7 % 5) as f64]).collect();
        let d = Dataset::from_rows("c", &rows, &[3.0; 30]).unwrap();
        for kind in LearnerKind::REGRESSORS {
            let m = fit_regressor(&LearnerSpec::new(kind), &d).unwrap();
            for p in m.predict(d.features()).unwrap() {
                assert_abs_diff_eq!(p, 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn depth_two_tree_fits_a_step() {
        let d = step_data();
        let mut spec = LearnerSpec::new(LearnerKind::DT);
        spec.max_depth = Some(2);
        let m = fit_regressor(&spec, &d).unwrap();
        assert!(mse(&m.predict(d.features()).unwrap(), d.target()) < 1e-6);
        assert!(m.trees()[0].depth() <= 2);
    }

    #[test]
    fn min_leaf_one_tree_memorises() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [(i * 13 % 17) as f64, (i % 7) as f64 + i as f64 * 0.01]).collect();
        let y: Vec<f64> = (0..40).map(|i| ((i * 31) % 11) as f64).collect();
        let d = Dataset::from_rows("m", &rows, &y).unwrap();
        let mut spec = LearnerSpec::new(LearnerKind::DT);
        spec.min_leaf = 1;
        let m = fit_regressor(&spec, &d).unwrap();
        assert_eq!(m.predict(d.features()).unwrap(), y);
    }

    #[test]
    fn empty_matrix_and_schema() {
        let d = step_data();
        let m = fit_regressor(&LearnerSpec::new(LearnerKind::DT), &d).unwrap();
        assert!(m.predict(&Matrix::zeros(0, 0)).unwrap().is_empty());
        assert_eq!(
            m.predict(&Matrix::zeros(2, 3)),
            Err(Error::SchemaMismatch { expected: 1, found: 3 })
        );
    }

    #[test]
    fn forest_prediction_is_mean_of_trees() {
        let d = step_data();
        let mut spec = LearnerSpec::new(LearnerKind::RF);
        spec.trees = 7;
        let m = fit_regressor(&spec, &d).unwrap();
        let per_tree = m.tree_predictions(d.features()).unwrap();
        let pred = m.predict(d.features()).unwrap();
        for (row, p) in per_tree.iter().zip(pred) {
            assert_eq!(row.len(), 7);
            assert_abs_diff_eq!(row.iter().sum::<f64>() / 7.0, p, epsilon = 1e-12);
        }
    }

    #[test]
    fn gbt_loss_never_increases() {
        let rows: Vec<[f64; 2]> = (0..80).map(|i| [i as f64, ((i * 17) % 23) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| libm::sin(r[0] / 9.0) * 3.0 + r[1] * 0.2).collect();
        let d = Dataset::from_rows("g", &rows, &y).unwrap();
        let m = fit_regressor(&LearnerSpec::new(LearnerKind::GBT), &d).unwrap();
        let loss = m.staged_train_loss().unwrap();
        assert_eq!(loss.len(), 101);
        for w in loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(loss[100] < 0.1 * loss[0]);
    }

    #[test]
    fn wrong_kinds_are_rejected() {
        let d = step_data();
        assert!(fit_regressor(&LearnerSpec::new(LearnerKind::RfClf), &d).is_err());
        assert!(fit_classifier(&LearnerSpec::new(LearnerKind::DT), d.features(), &["a"; 200]).is_err());
        let empty: [&str; 0] = [];
        assert_eq!(
            fit_classifier(&LearnerSpec::new(LearnerKind::DtClf), &Matrix::zeros(0, 1), &empty),
            Err(Error::EmptyInput)
        );
    }

    #[test]
    fn single_label_classifier() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]], 1).unwrap();
        let m = fit_classifier(&LearnerSpec::new(LearnerKind::RfClf), &x, &["WERCS"; 3]).unwrap();
        assert_eq!(m.predict_labels(&x).unwrap(), vec!["WERCS"; 3]);
        assert_eq!(gini_importance(&m).unwrap(), vec![0.0]);
    }

    #[test]
    fn separable_classes_and_importance() {
        // label depends on feature 0 only; feature 1 is noise
        let rows: Vec<[f64; 2]> = (0..100).map(|i| [i as f64, ((i * 37) % 29) as f64]).collect();
        let labels: Vec<&str> = (0..100).map(|i| if i < 40 { "b" } else { "a" }).collect();
        let x = Matrix::from_rows(&rows, 2).unwrap();
        let mut spec = LearnerSpec::new(LearnerKind::RfClf);
        spec.trees = 50;
        let m = fit_classifier(&spec, &x, &labels).unwrap();
        assert_eq!(m.predict_labels(&x).unwrap(), labels);
        let imp = gini_importance(&m).unwrap();
        assert_abs_diff_eq!(imp.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert!(imp[0] > 0.9, "{imp:?}");
        assert_eq!(m.classes(), ["a", "b"]);
    }

    #[test]
    fn vote_ties_go_to_smallest_label() {
        let m = TrainedModel {
            spec: LearnerSpec::new(LearnerKind::RfClf),
            feature_names: vec!["x1".into()],
            fitted: Fitted::Vote {
                classes: vec!["a".into(), "b".into(), "c".into()],
                trees: vec![Tree { nodes: vec![Node::Leaf(2.0)] }, Tree { nodes: vec![Node::Leaf(1.0)] }],
            },
            importance: vec![0.0],
        };
        assert_eq!(m.predict_labels(&Matrix::zeros(1, 1)).unwrap(), vec!["b"]);
    }

    #[test]
    fn fits_are_deterministic() {
        let d = step_data();
        for kind in LearnerKind::REGRESSORS {
            let spec = LearnerSpec::new(kind).with_seed(9);
            assert_eq!(fit_regressor(&spec, &d).unwrap(), fit_regressor(&spec, &d).unwrap());
        }
        let labels: Vec<&str> = d.target().iter().map(|&v| if v > 0.5 { "p" } else { "q" }).collect();
        let spec = LearnerSpec::new(LearnerKind::RfClf).with_seed(3);
        assert_eq!(
            fit_classifier(&spec, d.features(), &labels).unwrap(),
            fit_classifier(&spec, d.features(), &labels).unwrap()
        );
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [LearnerKind::DT, LearnerKind::RfClf, LearnerKind::GBT] {
            assert_eq!(LearnerKind::from_name(k.name()), Some(k));
        }
        assert_eq!(LearnerKind::from_name("rf-clf"), Some(LearnerKind::RfClf));
        assert_eq!(LearnerKind::from_name("MLP"), None);
    }
}
