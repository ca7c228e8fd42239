use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::linalg::symmetric_eigen;
use crate::matrix::Matrix;
use crate::stats;

/// Share of variance the retained components must explain.
pub const EXPLAINED_VARIANCE: f64 = 0.95;

/// Principal components of the standardised non-constant columns needed to
/// explain [`EXPLAINED_VARIANCE`]; 0 when every column is constant.
pub fn principal_components_needed(x: &Matrix) -> usize {
    let n = x.rows();
    let cols: Vec<Vec<f64>> = (0..x.cols())
        .map(|j| x.column(j))
        .filter_map(|c| {
            let sd = stats::sample_sd(&c);
            if !(sd > 0.0) {
                return None;
            }
            let m = stats::mean(&c);
            Some(c.iter().map(|v| (v - m) / sd).collect())
        })
        .collect();
    let p = cols.len();
    if p == 0 || n < 2 {
        return 0;
    }
    let mut cov = Matrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let s: f64 = cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum::<f64>() / (n - 1) as f64;
            cov.set(a, b, s);
            cov.set(b, a, s);
        }
    }
    let (values, _) = symmetric_eigen(&cov);
    let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        acc += v;
        if acc >= EXPLAINED_VARIANCE * total - 1e-12 * total {
            return k + 1;
        }
    }
    p
}

/// T2 = n/d, T3 = m'/n, T4 = m'/d.
pub fn dimensionality_measures(d: &Dataset) -> [f64; 3] {
    let n = d.n() as f64;
    let dim = d.d() as f64;
    let m = principal_components_needed(d.features()) as f64;
    [n / dim, m / n, m / dim]
}
