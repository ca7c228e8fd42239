use alloc::vec::Vec;

use super::{aggregate, Interpolated, Normalized};
use crate::stats::euclidean;

/// Kruskal MST over the complete Euclidean graph of `rows`. Edges are
/// ordered by (weight, i, j); returns `(i, j)` pairs with `i < j`.
pub fn minimum_spanning_tree(rows: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = rows.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((euclidean(&rows[i], &rows[j]), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (_, i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
            tree.push((i, j));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    tree
}

/// Nearest row of `rows` to `q` other than `skip`; smallest index on ties.
fn nearest(rows: &[Vec<f64>], q: &[f64], skip: Option<usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in rows.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let dist = euclidean(r, q);
        if best.is_none_or(|(_, b)| dist < b) {
            best = Some((i, dist));
        }
    }
    best.map(|b| b.0)
}

/// S1..S4, each as {avg,max,min,sd}, on normalised data.
pub fn smoothness_measures(norm: &Normalized, points: &Interpolated) -> [f64; 16] {
    let rows = &norm.rows;
    let y = &norm.y;
    let n = y.len();

    let s1: Vec<f64> = minimum_spanning_tree(rows)
        .into_iter()
        .map(|(i, j)| libm::fabs(y[i] - y[j]))
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let s2: Vec<f64> = order.windows(2).map(|w| euclidean(&rows[w[0]], &rows[w[1]])).collect();

    let s3: Vec<f64> = (0..n)
        .filter_map(|i| nearest(rows, &rows[i], Some(i)).map(|j| (y[i] - y[j]) * (y[i] - y[j])))
        .collect();

    let s4: Vec<f64> = points
        .rows
        .iter()
        .zip(&points.y)
        .filter_map(|(r, t)| nearest(rows, r, None).map(|j| (t - y[j]) * (t - y[j])))
        .collect();

    let mut out = [0.0; 16];
    out[..4].copy_from_slice(&aggregate(&s1));
    let mut a2 = aggregate(&s2);
    // the average divides by the number of examples, not of pairs
    a2[0] = if n == 0 { 0.0 } else { s2.iter().sum::<f64>() / n as f64 };
    out[4..8].copy_from_slice(&a2);
    out[8..12].copy_from_slice(&aggregate(&s3));
    out[12..].copy_from_slice(&aggregate(&s4));
    out
}

#[cfg(test)]
mod tests {
    use super::super::{interpolated_points, normalize};
    use super::*;
    use crate::dataset::Dataset;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn weight(rows: &[Vec<f64>], edges: &[(usize, usize)]) -> f64 {
        edges.iter().map(|&(i, j)| euclidean(&rows[i], &rows[j])).sum()
    }

    /// Lightest spanning tree found by trying every (n-1)-subset of edges.
    fn brute_force_mst_weight(rows: &[Vec<f64>]) -> f64 {
        let n = rows.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << edges.len()) {
            if mask.count_ones() as usize != n - 1 {
                continue;
            }
            let chosen: Vec<(usize, usize)> = (0..edges.len()).filter(|k| mask & (1 << k) != 0).map(|k| edges[k]).collect();
            // n - 1 edges span iff they connect everything
            let mut comp: Vec<usize> = (0..n).collect();
            for &(i, j) in &chosen {
                let (a, b) = (comp[i], comp[j]);
                for c in comp.iter_mut() {
                    if *c == b {
                        *c = a;
                    }
                }
            }
            if comp.iter().all(|&c| c == comp[0]) {
                best = best.min(weight(rows, &chosen));
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn mst_weight_matches_enumeration(
            pts in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 2), 2..=6)
        ) {
            let tree = minimum_spanning_tree(&pts);
            prop_assert_eq!(tree.len(), pts.len() - 1);
            let w = weight(&pts, &tree);
            prop_assert!((w - brute_force_mst_weight(&pts)).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicated_rows_are_smooth() {
        let rows = [[1.0, 2.0], [1.0, 2.0], [3.0, 0.0], [3.0, 0.0]];
        let d = Dataset::from_rows("dup", &rows, &[1.0, 1.0, 5.0, 5.0]).unwrap();
        let norm = normalize(&d);
        let pts = interpolated_points(&norm.rows, &norm.y, &[0.3; 4]);
        let s = smoothness_measures(&norm, &pts);
        // the MST joins each duplicate pair at zero cost plus one bridge
        assert_abs_diff_eq!(s[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(s[8..12], [0.0; 4]);
    }

    #[test]
    fn fully_duplicated_rows() {
        let d = Dataset::from_rows("same", &[[1.0], [1.0], [1.0]], &[2.0, 2.0, 2.0]).unwrap();
        let norm = normalize(&d);
        let pts = interpolated_points(&norm.rows, &norm.y, &[0.5; 3]);
        let s = smoothness_measures(&norm, &pts);
        assert_eq!(s[..4], [0.0; 4]);
        assert_eq!(s[8..12], [0.0; 4]);
    }

    #[test]
    fn line_gives_constant_spacing() {
        let rows: Vec<[f64; 1]> = (0..5).map(|i| [i as f64]).collect();
        let y: Vec<f64> = (0..5).map(f64::from).collect();
        let d = Dataset::from_rows("line", &rows, &y).unwrap();
        let norm = normalize(&d);
        let pts = interpolated_points(&norm.rows, &norm.y, &[0.0; 5]);
        let s = smoothness_measures(&norm, &pts);
        assert_abs_diff_eq!(s[5], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s[6], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s[7], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[4], 4.0 * 0.25 / 5.0, epsilon = 1e-15);
        // interpolated points at u = 0 sit on examples
        assert_eq!(s[12..], [0.0; 4]);
    }

    #[test]
    fn nearest_breaks_ties_by_index() {
        let rows = vec![vec![0.0], vec![2.0], vec![1.0]];
        assert_eq!(nearest(&rows, &[1.0], Some(2)), Some(0));
    }
}
