//! CART trees over a node arena, for squared-loss regression and Gini
//! classification.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Node {
    /// Mean target for regression, class index for classification.
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Labels<'a> {
    Real(&'a [f64]),
    Class(&'a [usize], usize),
}

#[derive(Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; equal to the width means all, in order.
    pub max_features: usize,
}

/// Grows one tree on the rows in `sample` (repeats allowed). Impurity
/// decreases are added to `importance`.
pub(crate) fn grow(
    x: &Matrix,
    labels: Labels<'_>,
    sample: &mut [usize],
    params: GrowParams,
    rng: &mut ChaCha8Rng,
    importance: &mut [f64],
) -> Tree {
    let mut g = Grower {
        x,
        labels,
        params,
        rng,
        importance,
        nodes: Vec::new(),
        order: (0..x.cols()).collect(),
    };
    g.build(sample, 0);
    Tree { nodes: g.nodes }
}

struct Grower<'a, 'r> {
    x: &'a Matrix,
    labels: Labels<'a>,
    params: GrowParams,
    rng: &'r mut ChaCha8Rng,
    importance: &'r mut [f64],
    nodes: Vec<Node>,
    order: Vec<usize>,
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Grower<'_, '_> {
    fn build(&mut self, sample: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(self.leaf_value(sample)));
        let impurity = self.impurity(sample);
        let depth_ok = self.params.max_depth.is_none_or(|m| depth < m);
        if !depth_ok || impurity <= 0.0 || sample.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(sample) else {
            return id;
        };
        if !(best.gain > 1e-12 * impurity) {
            return id;
        }
        self.importance[best.feature] += best.gain;
        let (f, t) = (best.feature, best.threshold);
        let mut cut = 0;
        for i in 0..sample.len() {
            if self.x.get(sample[i], f) <= t {
                sample.swap(i, cut);
                cut += 1;
            }
        }
        let (l, r) = sample.split_at_mut(cut);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: f,
            threshold: t,
            left,
            right,
        };
        id
    }

    fn leaf_value(&self, sample: &[usize]) -> f64 {
        match self.labels {
            Labels::Real(y) => sample.iter().map(|&i| y[i]).sum::<f64>() / sample.len() as f64,
            Labels::Class(c, k) => {
                let counts = class_counts(c, k, sample);
                let mut best = 0;
                for (j, &n) in counts.iter().enumerate() {
                    if n > counts[best] {
                        best = j;
                    }
                }
                best as f64
            }
        }
    }

    /// Node SSE for regression, n times Gini for classification.
    fn impurity(&self, sample: &[usize]) -> f64 {
        let n = sample.len() as f64;
        match self.labels {
            Labels::Real(y) => {
                let m = sample.iter().map(|&i| y[i]).sum::<f64>() / n;
                sample.iter().map(|&i| (y[i] - m) * (y[i] - m)).sum()
            }
            Labels::Class(c, k) => {
                let sq: f64 = class_counts(c, k, sample).iter().map(|&v| (v * v) as f64).sum();
                n - sq / n
            }
        }
    }

    fn best_split(&mut self, sample: &[usize]) -> Option<Best> {
        let d = self.x.cols();
        let all = self.params.max_features >= d;
        if !all {
            self.order.shuffle(self.rng);
        }
        let mut best: Option<Best> = None;
        let mut visited = 0;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(sample.len());
        for oi in 0..d {
            if visited >= self.params.max_features {
                break;
            }
            let f = if all { oi } else { self.order[oi] };
            sorted.clear();
            sorted.extend(sample.iter().map(|&i| (self.x.get(i, f), i)));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if sorted[0].0 == sorted[sorted.len() - 1].0 {
                continue;
            }
            visited += 1;
            if let Some((pos, gain)) = self.sweep(&sorted) {
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let (a, b) = (sorted[pos - 1].0, sorted[pos].0);
                    let mut threshold = 0.5 * (a + b);
                    if !(threshold >= a && threshold < b) {
                        threshold = a;
                    }
                    best = Some(Best {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    /// Best cut position (first index of the right side) and its impurity
    /// decrease.
    fn sweep(&self, sorted: &[(f64, usize)]) -> Option<(usize, f64)> {
        let n = sorted.len();
        let min_leaf = self.params.min_leaf;
        let mut best: Option<(usize, f64)> = None;
        let mut consider = |pos: usize, gain: f64| {
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((pos, gain));
            }
        };
        match self.labels {
            Labels::Real(y) => {
                // centred targets make the decrease S_l^2/n_l + S_r^2/n_r
                let mean = sorted.iter().map(|&(_, i)| y[i]).sum::<f64>() / n as f64;
                let total: f64 = sorted.iter().map(|&(_, i)| y[i] - mean).sum();
                let mut left = 0.0;
                for pos in 1..n {
                    left += y[sorted[pos - 1].1] - mean;
                    if pos < min_leaf || n - pos < min_leaf || sorted[pos - 1].0 == sorted[pos].0 {
                        continue;
                    }
                    let right = total - left;
                    let nl = pos as f64;
                    let nr = (n - pos) as f64;
                    let gain = left * left / nl + right * right / nr - total * total / n as f64;
                    consider(pos, gain);
                }
            }
            Labels::Class(c, k) => {
                let mut right_counts = alloc::vec![0usize; k];
                for &(_, i) in sorted {
                    right_counts[c[i]] += 1;
                }
                let mut left_counts = alloc::vec![0usize; k];
                let mut sq_r: f64 = right_counts.iter().map(|&v| (v * v) as f64).sum();
                let parent = sq_r / n as f64;
                let mut sq_l = 0.0;
                for pos in 1..n {
                    let cls = c[sorted[pos - 1].1];
                    sq_l += (2 * left_counts[cls] + 1) as f64;
                    sq_r -= (2 * right_counts[cls] - 1) as f64;
                    left_counts[cls] += 1;
                    right_counts[cls] -= 1;
                    if pos < min_leaf || n - pos < min_leaf || sorted[pos - 1].0 == sorted[pos].0 {
                        continue;
                    }
                    let gain = sq_l / pos as f64 + sq_r / (n - pos) as f64 - parent;
                    consider(pos, gain);
                }
            }
        }
        best
    }
}

fn class_counts(c: &[usize], k: usize, sample: &[usize]) -> Vec<usize> {
    let mut counts = alloc::vec![0usize; k];
    for &i in sample {
        counts[c[i]] += 1;
    }
    counts
}
