use alloc::vec::Vec;

use super::{aggregate, normalize};
use crate::dataset::Dataset;
use crate::stats;

/// Correlation level C3 must exceed.
pub const HIGH_CORRELATION: f64 = 0.9;
/// Residual magnitude C4 treats as explained.
pub const RESIDUAL_TOLERANCE: f64 = 0.1;

/// |Spearman| between each feature and the target.
pub fn spearman_abs(d: &Dataset) -> Vec<f64> {
    (0..d.d())
        .map(|j| libm::fabs(stats::spearman(&d.features().column(j), d.target())))
        .collect()
}

/// C1, C2.{avg,max,min,sd}, C3.{avg,max,min,sd}, C4.avg.
pub fn correlation_measures(d: &Dataset) -> [f64; 10] {
    let rho = spearman_abs(d);
    let c2 = aggregate(&rho);
    let n = d.n() as f64;
    let c3: Vec<f64> = (0..d.d())
        .map(|j| c3_removals(&d.features().column(j), d.target()) as f64 / n)
        .collect();
    let c3 = aggregate(&c3);
    [c2[1], c2[0], c2[1], c2[2], c2[3], c3[0], c3[1], c3[2], c3[3], c4(d)]
}

/// Examples removed, greedily, before |Spearman(x, y)| exceeds the high
/// correlation level. Each step drops the example whose removal raises the
/// correlation most (smallest index on ties). Returns `x.len()` when the
/// level is never reached.
pub fn c3_removals(x: &[f64], y: &[f64]) -> usize {
    let n = x.len();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut rx = stats::average_ranks(x);
    let mut ry = stats::average_ranks(y);
    if libm::fabs(stats::pearson(&rx, &ry)) > HIGH_CORRELATION {
        return 0;
    }
    let mut removed = 0;
    while alive.len() > 2 {
        let m = alive.len();
        let mut best: Option<(usize, f64)> = None;
        for p in 0..m {
            let r = abs_rank_corr_without(x, y, &alive, &rx, &ry, p);
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((p, r));
            }
        }
        let (p, r) = best.unwrap_or((0, 0.0));
        let (xi, yi) = (x[alive[p]], y[alive[p]]);
        alive.remove(p);
        rx.remove(p);
        ry.remove(p);
        for k in 0..alive.len() {
            rx[k] -= rank_shift(x[alive[k]], xi);
            ry[k] -= rank_shift(y[alive[k]], yi);
        }
        removed += 1;
        if r > HIGH_CORRELATION {
            return removed;
        }
    }
    n
}

/// Change in an average rank when a value `gone` leaves the sample.
fn rank_shift(v: f64, gone: f64) -> f64 {
    if v > gone {
        1.0
    } else if v == gone {
        0.5
    } else {
        0.0
    }
}

/// |Pearson| of the ranks that remain after dropping position `p`.
fn abs_rank_corr_without(x: &[f64], y: &[f64], alive: &[usize], rx: &[f64], ry: &[f64], p: usize) -> f64 {
    let (xg, yg) = (x[alive[p]], y[alive[p]]);
    // average ranks of m - 1 items always have mean m / 2
    let mean = alive.len() as f64 / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for k in 0..alive.len() {
        if k == p {
            continue;
        }
        let a = rx[k] - rank_shift(x[alive[k]], xg) - mean;
        let b = ry[k] - rank_shift(y[alive[k]], yg) - mean;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    libm::fabs(sab / (libm::sqrt(saa) * libm::sqrt(sbb))).min(1.0)
}

/// Fraction of examples left unexplained after repeatedly fitting the most
/// correlated remaining feature and discarding well-fitted examples.
fn c4(d: &Dataset) -> f64 {
    let norm = normalize(d);
    let n = d.n();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut features: Vec<usize> = (0..d.d()).collect();
    while !features.is_empty() && !alive.is_empty() {
        let ys: Vec<f64> = alive.iter().map(|&i| norm.y[i]).collect();
        let mut pick = 0;
        let mut best = -1.0;
        for (k, &j) in features.iter().enumerate() {
            let xs: Vec<f64> = alive.iter().map(|&i| norm.cols[j][i]).collect();
            let r = libm::fabs(stats::spearman(&xs, &ys));
            if r > best {
                best = r;
                pick = k;
            }
        }
        let j = features.remove(pick);
        let xs: Vec<f64> = alive.iter().map(|&i| norm.cols[j][i]).collect();
        let (a, b) = simple_regression(&xs, &ys);
        alive = alive
            .iter()
            .zip(xs.iter().zip(&ys))
            .filter(|(_, (x, y))| libm::fabs(*y - (a + b * *x)) > RESIDUAL_TOLERANCE)
            .map(|(&i, _)| i)
            .collect();
    }
    alive.len() as f64 / n as f64
}

/// Intercept and slope of y on x; a flat x gives the mean.
fn simple_regression(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = stats::mean(x);
    let my = stats::mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return (my, 0.0);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}
