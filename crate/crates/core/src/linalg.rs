//! Small dense linear algebra: symmetric eigen-decomposition by cyclic Jacobi
//! rotations and least squares through the eigen-based pseudo-inverse.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of the returned matrix.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = m.get(i, j) * m.get(i, j);
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = v.select_cols(&order);
    (values, vectors)
}

/// Minimum-norm least squares solution of `x · beta ≈ y`.
///
/// Solves the normal equations with the pseudo-inverse of `xᵀx`, so rank
/// deficient designs (constant or duplicated columns) still get a solution.
pub fn least_squares(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let p = x.cols();
    let mut xtx = Matrix::zeros(p, p);
    let mut xty = vec![0.0; p];
    for (row, &yi) in x.iter_rows().zip(y) {
        for a in 0..p {
            xty[a] += row[a] * yi;
            for b in a..p {
                let v = xtx.get(a, b) + row[a] * row[b];
                xtx.set(a, b, v);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx.set(a, b, xtx.get(b, a));
        }
    }
    let (values, vectors) = symmetric_eigen(&xtx);
    let largest = values.first().copied().unwrap_or(0.0).abs();
    let tol = largest * 1e-12 * p as f64;
    let mut beta = vec![0.0; p];
    for (k, &lambda) in values.iter().enumerate() {
        if lambda.abs() <= tol || lambda == 0.0 {
            continue;
        }
        let proj: f64 = (0..p).map(|i| vectors.get(i, k) * xty[i]).sum::<f64>() / lambda;
        for (i, b) in beta.iter_mut().enumerate() {
            *b += proj * vectors.get(i, k);
        }
    }
    beta
}

/// Prepends a column of ones.
pub fn with_intercept(x: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols() + 1);
    for i in 0..x.rows() {
        let r = out.row_mut(i);
        r[0] = 1.0;
        r[1..].copy_from_slice(x.row(i));
    }
    out
}
