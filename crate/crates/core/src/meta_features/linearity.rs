use alloc::vec::Vec;

use super::{aggregate, Normalized};
use crate::linalg;
use crate::matrix::Matrix;

/// Synthetic points between target-adjacent examples.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolated {
    pub rows: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

/// One point per entry of `u`: pairs of target-consecutive examples (stable
/// sort) are used in turn, cycling when `u` is longer than the pair list.
pub fn interpolated_points(rows: &[Vec<f64>], y: &[f64], u: &[f64]) -> Interpolated {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let pairs = y.len().saturating_sub(1);
    let mut out = Interpolated {
        rows: Vec::with_capacity(u.len()),
        y: Vec::with_capacity(u.len()),
    };
    if pairs == 0 {
        return out;
    }
    for (k, &t) in u.iter().enumerate() {
        let (a, b) = (order[k % pairs], order[k % pairs + 1]);
        out.rows.push(rows[a].iter().zip(&rows[b]).map(|(p, q)| p + t * (q - p)).collect());
        out.y.push(y[a] + t * (y[b] - y[a]));
    }
    out
}

/// L1.{avg,max,min,sd}, L2.{avg,max,min}, L3.{avg,max,min,sd} from a least
/// squares fit with intercept on normalised data.
pub fn linearity_measures(norm: &Normalized, points: &Interpolated) -> [f64; 11] {
    let d = norm.cols.len();
    let x = Matrix::from_rows(&norm.rows, d).unwrap_or_default();
    let beta = linalg::least_squares(&linalg::with_intercept(&x), &norm.y);
    let predict = |r: &[f64]| beta[0] + r.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
    let residuals: Vec<f64> = norm.rows.iter().zip(&norm.y).map(|(r, y)| y - predict(r)).collect();
    let abs: Vec<f64> = residuals.iter().map(|e| libm::fabs(*e)).collect();
    let sq: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    let interp: Vec<f64> = points
        .rows
        .iter()
        .zip(&points.y)
        .map(|(r, y)| (y - predict(r)) * (y - predict(r)))
        .collect();
    let l1 = aggregate(&abs);
    let l2 = aggregate(&sq);
    let l3 = aggregate(&interp);
    [l1[0], l1[1], l1[2], l1[3], l2[0], l2[1], l2[2], l3[0], l3[1], l3[2], l3[3]]
}

#[cfg(test)]
mod tests {
    use super::super::normalize;
    use super::*;
    use crate::dataset::Dataset;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn normal_equation_residuals(x: &[[f64; 2]], y: &[f64]) -> Vec<f64> {
        // 3x3 normal equations solved by Cramer's rule
        let rows: Vec<[f64; 3]> = x.iter().map(|r| [1.0, r[0], r[1]]).collect();
        let mut a = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for (r, &t) in rows.iter().zip(y) {
            for i in 0..3 {
                b[i] += r[i] * t;
                for j in 0..3 {
                    a[i][j] += r[i] * r[j];
                }
            }
        }
        let det = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let full = det(a);
        let beta: Vec<f64> = (0..3)
            .map(|k| {
                let mut m = a;
                for i in 0..3 {
                    m[i][k] = b[i];
                }
                det(m) / full
            })
            .collect();
        rows.iter()
            .zip(y)
            .map(|(r, t)| t - (beta[0] + beta[1] * r[1] + beta[2] * r[2]))
            .collect()
    }

    #[test]
    fn residuals_match_normal_equations() {
        let rows = [[0.1, 0.9], [0.4, 0.2], [0.7, 0.5], [1.0, 0.0], [0.0, 1.0]];
        let y = [0.3, 0.8, 0.1, 1.0, 0.0];
        let d = Dataset::from_rows("n5", &rows, &y).unwrap();
        let norm = normalize(&d);
        let nrows: Vec<[f64; 2]> = norm.rows.iter().map(|r| [r[0], r[1]]).collect();
        let expected = normal_equation_residuals(&nrows, &norm.y);
        let empty = Interpolated { rows: vec![], y: vec![] };
        let l = linearity_measures(&norm, &empty);
        let abs: Vec<f64> = expected.iter().map(|e| e.abs()).collect();
        let agg = aggregate(&abs);
        for k in 0..4 {
            assert_abs_diff_eq!(l[k], agg[k], epsilon = 1e-9);
        }
        let sq: Vec<f64> = expected.iter().map(|e| e * e).collect();
        assert_abs_diff_eq!(l[4], sq.iter().sum::<f64>() / 5.0, epsilon = 1e-9);
        assert!(l[4] >= l[0] * l[0]);
    }

    #[test]
    fn interpolation_cycles_target_sorted_pairs() {
        let rows = vec![vec![0.0], vec![1.0], vec![0.5]];
        let y = [0.0, 1.0, 0.5];
        let p = interpolated_points(&rows, &y, &[0.5, 0.5, 0.0]);
        assert_eq!(p.y, vec![0.25, 0.75, 0.0]);
        assert_eq!(p.rows, vec![vec![0.25], vec![0.75], vec![0.0]]);
    }
}
