//! Relevance function built from boxplot control points.
//!
//! The function is a piecewise cubic Hermite interpolant over the control
//! points with Fritsch–Carlson limited slopes, clamped to the end control
//! points outside the knot span.

use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlPoint {
    /// Location in target units.
    pub y: f64,
    /// Relevance at `y`, in [0, 1].
    pub phi: f64,
    /// Slope of the relevance at `y`, per target unit.
    pub dphi: f64,
}

impl ControlPoint {
    pub const fn new(y: f64, phi: f64, dphi: f64) -> Self {
        ControlPoint { y, phi, dphi }
    }
}

/// Monotone piecewise-cubic map from target values to [0, 1].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelevanceFunction {
    points: Vec<ControlPoint>,
    /// Limited slopes actually used at each knot.
    slopes: Vec<f64>,
}

/// Tukey boxplot control points: adjacent limits get relevance 1, the
/// median relevance 0, all with zero slope.
pub fn boxplot_control_points(target: &[f64]) -> Result<Vec<ControlPoint>> {
    if target.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sorted = stats::sorted_copy(target);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if lo == hi {
        return Err(Error::ConstantTarget);
    }
    let q1 = stats::quantile_sorted(&sorted, 0.25);
    let med = stats::quantile_sorted(&sorted, 0.5);
    let q3 = stats::quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let eps = 1e-9 * (hi - lo + 1.0);
    let mut adj_l = q1 - 1.5 * iqr;
    let mut adj_h = q3 + 1.5 * iqr;
    if adj_l >= med {
        adj_l = lo - eps;
    }
    if adj_h <= med {
        adj_h = hi + eps;
    }
    Ok(alloc::vec![
        ControlPoint::new(adj_l, 1.0, 0.0),
        ControlPoint::new(med, 0.0, 0.0),
        ControlPoint::new(adj_h, 1.0, 0.0),
    ])
}

impl RelevanceFunction {
    /// Fits the interpolant; supplied slopes are limited with the
    /// Fritsch–Carlson conditions so every segment stays monotone.
    pub fn fit(points: &[ControlPoint]) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("control_points", "need at least two"));
        }
        for p in points {
            if !(0.0..=1.0).contains(&p.phi) {
                return Err(Error::RelevanceOutOfRange(p.phi));
            }
            if !p.y.is_finite() || !p.dphi.is_finite() {
                return Err(invalid("control_points", "non-finite value"));
            }
        }
        if points.windows(2).any(|w| w[1].y <= w[0].y) {
            return Err(Error::NonIncreasingControlPoints);
        }

        let mut m: Vec<f64> = points.iter().map(|p| p.dphi).collect();
        for k in 0..points.len() - 1 {
            let h = points[k + 1].y - points[k].y;
            let delta = (points[k + 1].phi - points[k].phi) / h;
            if delta == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            if m[k] * delta < 0.0 {
                m[k] = 0.0;
            }
            if m[k + 1] * delta < 0.0 {
                m[k + 1] = 0.0;
            }
            let a = m[k] / delta;
            let b = m[k + 1] / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / libm::sqrt(r);
                m[k] = tau * a * delta;
                m[k + 1] = tau * b * delta;
            }
        }
        Ok(RelevanceFunction {
            points: points.to_vec(),
            slopes: m,
        })
    }

    /// Boxplot control points of `target`, fitted.
    pub fn from_target(target: &[f64]) -> Result<Self> {
        Self::fit(&boxplot_control_points(target)?)
    }

    pub fn control_points(&self) -> &[ControlPoint] {
        &self.points
    }

    /// Relevance of `y`; total, with clamped extrapolation.
    pub fn phi(&self, y: f64) -> f64 {
        let pts = &self.points;
        let last = pts.len() - 1;
        if y.is_nan() {
            return 0.0;
        }
        if y <= pts[0].y {
            return pts[0].phi;
        }
        if y >= pts[last].y {
            return pts[last].phi;
        }
        // first knot strictly greater than y
        let k = pts.partition_point(|p| p.y <= y) - 1;
        let (p0, p1) = (&pts[k], &pts[k + 1]);
        let h = p1.y - p0.y;
        let t = (y - p0.y) / h;
        if t == 0.0 {
            return p0.phi;
        }
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * p0.phi + h10 * h * self.slopes[k] + h01 * p1.phi + h11 * h * self.slopes[k + 1];
        v.clamp(0.0, 1.0)
    }

    pub fn phi_all(&self, ys: &[f64]) -> Vec<f64> {
        ys.iter().map(|&y| self.phi(y)).collect()
    }
}

/// Indices with `phi(y) >= t_r` (rare) and the rest (normal).
pub fn split_rare_normal(
    d: &Dataset,
    f: &RelevanceFunction,
    t_r: f64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    check_threshold(t_r)?;
    Ok(partition_by_relevance(d.target(), f, t_r))
}

pub(crate) fn check_threshold(t_r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t_r) {
        return Err(invalid("t_r", "must lie in [0, 1]"));
    }
    Ok(())
}

pub(crate) fn partition_by_relevance(
    target: &[f64],
    f: &RelevanceFunction,
    t_r: f64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rare = Vec::new();
    let mut normal = Vec::new();
    for (i, &y) in target.iter().enumerate() {
        if f.phi(y) >= t_r {
            rare.push(i);
        } else {
            normal.push(i);
        }
    }
    (rare, normal)
}
