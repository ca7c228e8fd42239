//! The 43 dataset characteristics used as meta-level inputs: simple counts
//! plus dimensionality, correlation, linearity and smoothness measures.

mod correlation;
mod dimensionality;
mod linearity;
mod smoothness;

use alloc::vec::Vec;

use rand::Rng;

pub use correlation::{c3_removals, correlation_measures, spearman_abs};
pub use dimensionality::{dimensionality_measures, principal_components_needed};
pub use linearity::{interpolated_points, linearity_measures, Interpolated};
pub use smoothness::{minimum_spanning_tree, smoothness_measures};

use crate::dataset::{derive_seed, rng_from_seed, Dataset};
use crate::error::{Error, Result};
use crate::relevance::RelevanceFunction;
use crate::stats;

pub const N_META_FEATURES: usize = 43;

/// Relevance above which a case counts as rare for `n.rare`.
pub const RARE_CUTOFF: f64 = 0.8;

pub const META_FEATURE_NAMES: [&str; N_META_FEATURES] = [
    "n.examples",
    "n.attributes",
    "n.rare",
    "p.rare",
    "T2",
    "T3",
    "T4",
    "C2.avg",
    "C2.max",
    "C2.min",
    "C2.sd",
    "C3.avg",
    "C3.max",
    "C3.min",
    "C3.sd",
    "C4.avg",
    "L1.avg",
    "L1.max",
    "L1.min",
    "L1.sd",
    "L2.avg",
    "L2.max",
    "L2.min",
    "L3.avg",
    "L3.max",
    "L3.min",
    "L3.sd",
    "S1.avg",
    "S1.max",
    "S1.min",
    "S1.sd",
    "S2.avg",
    "S2.max",
    "S2.min",
    "S2.sd",
    "S3.avg",
    "S3.max",
    "S3.min",
    "S3.sd",
    "S4.avg",
    "S4.max",
    "S4.min",
    "S4.sd",
];

/// Position of a named meta-feature.
pub fn index_of(name: &str) -> Option<usize> {
    META_FEATURE_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetaFeatureVector {
    values: Vec<f64>,
}

impl MetaFeatureVector {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != N_META_FEATURES {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: N_META_FEATURES,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite meta-feature".into()));
        }
        Ok(MetaFeatureVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names() -> &'static [&'static str] {
        &META_FEATURE_NAMES
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        index_of(name).map(|i| self.values[i])
    }
}

/// Average, maximum, minimum and sample standard deviation; zeros when empty.
pub fn aggregate(values: &[f64]) -> [f64; 4] {
    if values.is_empty() {
        return [0.0; 4];
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    [stats::mean(values), max, min, stats::sample_sd(values)]
}

/// n.examples, n.attributes, n.rare and p.rare.
pub fn simple_measures(d: &Dataset, f: &RelevanceFunction) -> [f64; 4] {
    let n = d.n();
    let rare = d.target().iter().filter(|&&y| f.phi(y) > RARE_CUTOFF).count();
    [n as f64, d.d() as f64, rare as f64, 100.0 * rare as f64 / n as f64]
}

/// Min-max normalised copies of the feature columns and of the target.
pub struct Normalized {
    pub rows: Vec<Vec<f64>>,
    pub cols: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

pub fn normalize(d: &Dataset) -> Normalized {
    let cols: Vec<Vec<f64>> = (0..d.d())
        .map(|j| stats::min_max_normalize(&d.features().column(j)))
        .collect();
    let rows = (0..d.n()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    Normalized {
        rows,
        cols,
        y: stats::min_max_normalize(d.target()),
    }
}

/// Seed for the interpolation draws of a dataset, keyed on its name.
pub fn interpolation_seed(d: &Dataset) -> u64 {
    derive_seed(0, &["interpolate", d.name()])
}

/// All 43 meta-features in [`META_FEATURE_NAMES`] order.
pub fn extract(d: &Dataset, f: &RelevanceFunction) -> Result<MetaFeatureVector> {
    if d.n() < 2 {
        return Err(Error::TooFewRows(d.n()));
    }
    let norm = normalize(d);
    let mut rng = rng_from_seed(interpolation_seed(d));
    let u: Vec<f64> = (0..d.n()).map(|_| rng.random::<f64>()).collect();
    let points = interpolated_points(&norm.rows, &norm.y, &u);

    let mut v = Vec::with_capacity(N_META_FEATURES);
    v.extend(simple_measures(d, f));
    v.extend(dimensionality_measures(d));
    // C1 duplicates C2.max, so only the C2..C4 entries are kept
    v.extend_from_slice(&correlation_measures(d)[1..]);
    v.extend(linearity_measures(&norm, &points));
    v.extend(smoothness_measures(&norm, &points));
    MetaFeatureVector::from_values(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn linear2() -> Dataset {
        let rows: Vec<[f64; 2]> = (0..30).map(|i| [i as f64, ((i * 7) % 13) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 0.5 * r[1] + 1.0).collect();
        Dataset::from_rows("lin2", &rows, &y).unwrap()
    }

    #[test]
    fn names_are_unique_and_ordered() {
        let mut sorted = META_FEATURE_NAMES.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 43);
        assert_eq!(index_of("p.rare"), Some(3));
        assert_eq!(index_of("S4.sd"), Some(42));
    }

    #[test]
    fn aggregate_singleton_and_empty() {
        assert_eq!(aggregate(&[2.0]), [2.0, 2.0, 2.0, 0.0]);
        assert_eq!(aggregate(&[]), [0.0; 4]);
    }

    #[test]
    fn simple_measures_count_strictly_above_cutoff() {
        let mut y: Vec<f64> = (1..=9).map(f64::from).collect();
        y.push(40.0);
        let rows: Vec<[f64; 1]> = y.iter().map(|&v| [v]).collect();
        let d = Dataset::from_rows("s", &rows, &y).unwrap();
        let f = RelevanceFunction::from_target(&y).unwrap();
        let expected = y.iter().filter(|&&v| f.phi(v) > 0.8).count() as f64;
        let s = simple_measures(&d, &f);
        assert_eq!(s[..3], [10.0, 1.0, expected]);
        assert_eq!(s[3], 100.0 * expected / 10.0);
    }

    #[test]
    fn median_targets_have_no_rare_cases() {
        let y = [5.0, 5.0, 5.0, 5.0, 4.0, 6.0];
        let rows: Vec<[f64; 1]> = (0..6).map(|i| [i as f64]).collect();
        let d = Dataset::from_rows("m", &rows, &y).unwrap();
        let f = RelevanceFunction::fit(&[
            crate::relevance::ControlPoint::new(0.0, 1.0, 0.0),
            crate::relevance::ControlPoint::new(5.0, 0.0, 0.0),
            crate::relevance::ControlPoint::new(10.0, 1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(simple_measures(&d, &f)[2..], [0.0, 0.0]);
    }

    #[test]
    fn extract_is_finite_and_repeatable() {
        let d = linear2();
        let f = RelevanceFunction::from_target(d.target()).unwrap();
        let a = extract(&d, &f).unwrap();
        let b = extract(&d, &f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values().len(), 43);
        assert!(a.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn linear_dataset_composition() {
        let d = linear2();
        let f = RelevanceFunction::from_target(d.target()).unwrap();
        let v = extract(&d, &f).unwrap();
        for name in ["L1.avg", "L1.max", "L2.avg", "L2.max"] {
            assert!(v.get(name).unwrap() < 1e-9, "{name}");
        }
        assert!(v.get("L3.avg").unwrap() < 1e-9);
        assert_eq!(v.get("T2"), Some(15.0));
        let rho = spearman_abs(&d);
        assert_eq!(v.get("C2.max"), Some(rho[0].max(rho[1])));
        assert_eq!(v.get("C1"), None);
    }

    #[test]
    fn rank_entries_ignore_feature_scaling() {
        let d = linear2();
        let scaled_rows: Vec<Vec<f64>> = (0..d.n()).map(|i| d.row(i).iter().map(|v| v * 10.0).collect()).collect();
        let scaled = Dataset::from_rows(d.name(), &scaled_rows, d.target()).unwrap();
        let f = RelevanceFunction::from_target(d.target()).unwrap();
        let a = extract(&d, &f).unwrap();
        let b = extract(&scaled, &f).unwrap();
        for (i, name) in META_FEATURE_NAMES.iter().enumerate() {
            if name.starts_with('C') || name.starts_with('L') || name.starts_with('S') {
                assert!((a.values()[i] - b.values()[i]).abs() < 1e-9, "{name}");
            }
        }
    }

    #[test]
    fn from_values_checks() {
        assert!(MetaFeatureVector::from_values(vec![0.0; 42]).is_err());
        let mut v = vec![0.0; 43];
        v[5] = f64::NAN;
        assert!(MetaFeatureVector::from_values(v).is_err());
        assert_eq!(interpolation_seed(&linear2()), derive_seed(0, &["interpolate".to_string(), "lin2".to_string()]));
    }
}
