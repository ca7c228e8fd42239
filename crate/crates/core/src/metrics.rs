//! Imbalance-aware evaluation: F1-scoreR and SERA for regression, F1-macro
//! for the meta-level classifiers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::relevance::{check_threshold, RelevanceFunction};

pub const DEFAULT_SERA_GRID: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Metric {
    F1R,
    Sera,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::F1R => "f1r",
            Metric::Sera => "sera",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1r" | "f1-scorer" | "f1_score_r" => Some(Metric::F1R),
            "sera" => Some(Metric::Sera),
            _ => None,
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::F1R)
    }

    /// Score given to pipelines that could not run.
    pub fn sentinel(self) -> f64 {
        match self {
            Metric::F1R => -1.0,
            Metric::Sera => f64::INFINITY,
        }
    }

    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        if self.higher_is_better() {
            a > b
        } else {
            a < b
        }
    }

    pub fn evaluate(self, y_true: &[f64], y_pred: &[f64], f: &RelevanceFunction, t_r: f64) -> Result<f64> {
        match self {
            Metric::F1R => f1_score_r(y_true, y_pred, f, t_r),
            Metric::Sera => sera(y_true, y_pred, f, DEFAULT_SERA_GRID),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub metric: Metric,
    pub value: f64,
    pub higher_is_better: bool,
}

impl EvalResult {
    pub fn new(metric: Metric, value: f64) -> Self {
        EvalResult {
            metric,
            value,
            higher_is_better: metric.higher_is_better(),
        }
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// Squared error over the cases with `phi(y_true) >= t`.
pub fn ser(y_true: &[f64], y_pred: &[f64], f: &RelevanceFunction, t: f64) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    Ok(y_true
        .iter()
        .zip(y_pred)
        .filter(|(&y, _)| f.phi(y) >= t)
        .map(|(y, p)| (p - y) * (p - y))
        .sum())
}

/// Squared error-relevance area: trapezoidal integral of [`ser`] over a
/// uniform grid of `grid_points` thresholds on [0, 1].
pub fn sera(y_true: &[f64], y_pred: &[f64], f: &RelevanceFunction, grid_points: usize) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    if grid_points < 2 {
        return Err(crate::error::invalid("grid_points", "need at least 2"));
    }
    // cases sorted by relevance, with suffix sums of squared error
    let mut cases: Vec<(f64, f64)> = y_true
        .iter()
        .zip(y_pred)
        .map(|(&y, &p)| (f.phi(y), (p - y) * (p - y)))
        .collect();
    cases.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut suffix = alloc::vec![0.0; cases.len() + 1];
    for i in (0..cases.len()).rev() {
        suffix[i] = suffix[i + 1] + cases[i].1;
    }
    let ser_at = |t: f64| {
        let first = cases.partition_point(|c| c.0 < t);
        suffix[first]
    };
    let steps = grid_points - 1;
    let h = 1.0 / steps as f64;
    let mut area = 0.0;
    let mut prev = ser_at(0.0);
    for j in 1..=steps {
        let cur = ser_at(j as f64 * h);
        area += 0.5 * h * (prev + cur);
        prev = cur;
    }
    Ok(area)
}

/// F1-scoreR on binarised relevance events: a case is relevant when its
/// relevance reaches `t_r`, for the truth and the prediction separately.
pub fn f1_score_r(y_true: &[f64], y_pred: &[f64], f: &RelevanceFunction, t_r: f64) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    check_threshold(t_r)?;
    let mut tp = 0usize;
    let mut predicted = 0usize;
    let mut actual = 0usize;
    for (&y, &p) in y_true.iter().zip(y_pred) {
        let is = f.phi(y) >= t_r;
        let said = f.phi(p) >= t_r;
        actual += is as usize;
        predicted += said as usize;
        tp += (is && said) as usize;
    }
    let precision = if predicted == 0 {
        if actual == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        tp as f64 / predicted as f64
    };
    let recall = if actual == 0 { 1.0 } else { tp as f64 / actual as f64 };
    Ok(harmonic(precision, recall))
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Unweighted mean of per-class F1 over the classes present in the truth.
pub fn f1_macro<L: Ord>(labels_true: &[L], labels_pred: &[L]) -> Result<f64> {
    check_lengths(labels_true.len(), labels_pred.len())?;
    if labels_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    // class -> (tp, predicted, actual)
    let mut counts: BTreeMap<&L, (usize, usize, usize)> = BTreeMap::new();
    for t in labels_true {
        counts.entry(t).or_default().2 += 1;
    }
    for (t, p) in labels_true.iter().zip(labels_pred) {
        if let Some(c) = counts.get_mut(p) {
            c.1 += 1;
            if t == p {
                c.0 += 1;
            }
        }
    }
    let total: f64 = counts
        .values()
        .map(|&(tp, pred, act)| {
            let precision = if pred == 0 { 0.0 } else { tp as f64 / pred as f64 };
            let recall = tp as f64 / act as f64;
            harmonic(precision, recall)
        })
        .sum();
    Ok(total / counts.len() as f64)
}

/// Fraction of positions where the labels agree.
pub fn accuracy<L: PartialEq>(labels_true: &[L], labels_pred: &[L]) -> Result<f64> {
    check_lengths(labels_true.len(), labels_pred.len())?;
    if labels_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = labels_true.iter().zip(labels_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / labels_true.len() as f64)
}
