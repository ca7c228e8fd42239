//! Relevance-based resampling strategies for imbalanced regression.
//!
//! Every strategy is a pure function of its inputs and seed. Rare cases are
//! rows with `phi(y) >= t_r`; the remaining rows are normal. Output rows keep
//! the original order for retained rows, followed by any generated rows.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicUsize, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{rng_from_seed, Dataset};
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::relevance::{check_threshold, partition_by_relevance, RelevanceFunction};
use crate::stats;

static APPLY_CALLS: AtomicUsize = AtomicUsize::new(0);

/// Number of [`apply`] calls made by this process so far.
pub fn apply_call_count() -> usize {
    APPLY_CALLS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ResamplingKind {
    None,
    SmoteR,
    RandomOver,
    RandomUnder,
    GaussianNoise,
    Smogn,
    Wercs,
}

impl ResamplingKind {
    pub const ALL: [ResamplingKind; 7] = [
        ResamplingKind::None,
        ResamplingKind::SmoteR,
        ResamplingKind::RandomOver,
        ResamplingKind::RandomUnder,
        ResamplingKind::GaussianNoise,
        ResamplingKind::Smogn,
        ResamplingKind::Wercs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResamplingKind::None => "NONE",
            ResamplingKind::SmoteR => "SMT",
            ResamplingKind::RandomOver => "RO",
            ResamplingKind::RandomUnder => "RU",
            ResamplingKind::GaussianNoise => "GN",
            ResamplingKind::Smogn => "SG",
            ResamplingKind::Wercs => "WERCS",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for ResamplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Strategy parameters. Each strategy reads only the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ResamplingParams {
    /// Rare neighbours considered by SmoteR and SMOGN.
    pub k: usize,
    /// Generated rows as a fraction of the rare count.
    pub over_pct: f64,
    /// Fraction of normal rows kept.
    pub under_pct: f64,
    /// Noise scale relative to each column's standard deviation.
    pub delta: f64,
    /// WERCS rows appended, as a fraction of n.
    pub over_fraction: f64,
    /// WERCS rows removed, as a fraction of n.
    pub under_fraction: f64,
}

impl Default for ResamplingParams {
    fn default() -> Self {
        ResamplingParams {
            k: 5,
            over_pct: 1.0,
            under_pct: 0.5,
            delta: 0.05,
            over_fraction: 0.5,
            under_fraction: 0.5,
        }
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResamplingSpec {
    pub kind: ResamplingKind,
    pub t_r: f64,
    pub params: ResamplingParams,
    pub seed: u64,
}

impl ResamplingSpec {
    pub fn new(kind: ResamplingKind) -> Self {
        ResamplingSpec {
            kind,
            t_r: DEFAULT_THRESHOLD,
            params: ResamplingParams::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_threshold(mut self, t_r: f64) -> Self {
        self.t_r = t_r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        check_threshold(self.t_r)?;
        if p.k < 1 {
            return Err(invalid("k", "must be at least 1"));
        }
        if !(p.over_pct >= 0.0) || !p.over_pct.is_finite() {
            return Err(invalid("over_pct", "must be non-negative"));
        }
        if !(p.under_pct > 0.0 && p.under_pct <= 1.0) {
            return Err(invalid("under_pct", "must lie in (0, 1]"));
        }
        if !(p.delta > 0.0) || !p.delta.is_finite() {
            return Err(invalid("delta", "must be positive"));
        }
        for (name, v) in [("over_fraction", p.over_fraction), ("under_fraction", p.under_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, "must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Applies the strategy named by `spec` to `d`.
pub fn apply(spec: &ResamplingSpec, d: &Dataset, f: &RelevanceFunction) -> Result<Dataset> {
    APPLY_CALLS.fetch_add(1, Ordering::Relaxed);
    spec.validate()?;
    let p = &spec.params;
    let t = spec.t_r;
    match spec.kind {
        ResamplingKind::None => Ok(d.clone()),
        ResamplingKind::RandomUnder => random_under(d, f, t, p.under_pct, spec.seed),
        ResamplingKind::RandomOver => random_over(d, f, t, p.over_pct, spec.seed),
        ResamplingKind::SmoteR => smoter(d, f, t, p.k, p.over_pct, p.under_pct, spec.seed),
        ResamplingKind::GaussianNoise => {
            gaussian_noise(d, f, t, p.delta, p.over_pct, p.under_pct, spec.seed)
        }
        ResamplingKind::Smogn => smogn(d, f, t, p.k, p.delta, p.over_pct, p.under_pct, spec.seed),
        ResamplingKind::Wercs => wercs(d, f, p.over_fraction, p.under_fraction, spec.seed),
    }
}

fn ceil_count(n: usize, frac: f64) -> usize {
    libm::ceil(n as f64 * frac) as usize
}

/// Keeps a uniform sample of `ceil(|normal| * under_pct)` normal rows.
fn sample_normals(normal: &[usize], under_pct: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let keep = ceil_count(normal.len(), under_pct).min(normal.len());
    index::sample(rng, normal.len(), keep)
        .into_iter()
        .map(|i| normal[i])
        .collect()
}

fn check_under_pct(under_pct: f64) -> Result<()> {
    if !(under_pct > 0.0 && under_pct <= 1.0) {
        return Err(invalid("under_pct", "must lie in (0, 1]"));
    }
    Ok(())
}

fn check_over_pct(over_pct: f64) -> Result<()> {
    if !(over_pct >= 0.0) || !over_pct.is_finite() {
        return Err(invalid("over_pct", "must be non-negative"));
    }
    Ok(())
}

/// Original rows `keep` (sorted) followed by generated rows.
fn assemble(d: &Dataset, mut keep: Vec<usize>, extra: Option<(Matrix, Vec<f64>)>) -> Result<Dataset> {
    keep.sort_unstable();
    let base = d.select(&keep);
    match extra {
        Some((rows, y)) => base.extended(&rows, &y),
        None => Ok(base),
    }
}

/// Random under-sampling of the normal cases.
pub fn random_under(
    d: &Dataset,
    f: &RelevanceFunction,
    t_r: f64,
    under_pct: f64,
    seed: u64,
) -> Result<Dataset> {
    check_threshold(t_r)?;
    check_under_pct(under_pct)?;
    let (rare, normal) = partition_by_relevance(d.target(), f, t_r);
    if normal.is_empty() {
        return Err(Error::NoNormalCases);
    }
    if rare.is_empty() {
        return Err(Error::NoRareCases);
    }
    let mut rng = rng_from_seed(seed);
    let mut keep = rare;
    keep.extend(sample_normals(&normal, under_pct, &mut rng));
    assemble(d, keep, None)
}

/// Random over-sampling: appends copies of rare rows drawn with replacement.
pub fn random_over(
    d: &Dataset,
    f: &RelevanceFunction,
    t_r: f64,
    over_pct: f64,
    seed: u64,
) -> Result<Dataset> {
    check_threshold(t_r)?;
    check_over_pct(over_pct)?;
    let (rare, _) = partition_by_relevance(d.target(), f, t_r);
    if rare.is_empty() {
        return Err(Error::NoRareCases);
    }
    let mut rng = rng_from_seed(seed);
    let extra = ceil_count(rare.len(), over_pct);
    let mut idx: Vec<usize> = (0..d.n()).collect();
    idx.extend((0..extra).map(|_| rare[rng.random_range(0..rare.len())]));
    Ok(d.select(&idx))
}

/// Nearest rare neighbours of every rare row, by Euclidean distance with
/// index tie-break. Entries are positions into `rare` paired with distances.
fn rare_neighbours(d: &Dataset, rare: &[usize], k: usize) -> Vec<Vec<(usize, f64)>> {
    let k = k.min(rare.len() - 1);
    rare.iter()
        .enumerate()
        .map(|(a, &i)| {
            let mut cand: Vec<(usize, f64)> = rare
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(b, &j)| (b, stats::euclidean(d.row(i), d.row(j))))
                .collect();
            cand.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            cand.truncate(k);
            cand
        })
        .collect()
}

/// Seeds for the generated rows: the rare rows cycled in a shuffled order.
fn seed_schedule(n_rare: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_rare).collect();
    order.shuffle(rng);
    (0..count).map(|i| order[i % n_rare]).collect()
}

/// Interpolates between a seed and a neighbour at a uniform position.
///
/// Categorical columns copy one of the two sources at random. The target is
/// the distance-weighted mean of the source targets.
fn interpolate(
    xs: &[f64],
    ys: f64,
    xn: &[f64],
    yn: f64,
    categorical: &[bool],
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let u: f64 = rng.random();
    let x: Vec<f64> = xs
        .iter()
        .zip(xn)
        .zip(categorical)
        .map(|((&a, &b), &cat)| {
            if cat {
                if rng.random_bool(0.5) {
                    a
                } else {
                    b
                }
            } else {
                a + u * (b - a)
            }
        })
        .collect();
    let y = interpolated_target(&x, xs, ys, xn, yn);
    (x, y)
}

/// Target of a synthetic row: source targets weighted by the inverse of
/// their distance to the new row.
pub(crate) fn interpolated_target(x: &[f64], xs: &[f64], ys: f64, xn: &[f64], yn: f64) -> f64 {
    let d1 = stats::euclidean(x, xs);
    let d2 = stats::euclidean(x, xn);
    if d1 == d2 {
        (ys + yn) / 2.0
    } else {
        (d2 * ys + d1 * yn) / (d1 + d2)
    }
}

fn column_sds(d: &Dataset) -> Vec<f64> {
    (0..d.d())
        .map(|j| stats::sample_sd(&d.features().column(j)))
        .collect()
}

fn normal_draw(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// SmoteR: under-samples normal rows and interpolates between rare rows and
/// their rare nearest neighbours.
#[allow(clippy::too_many_arguments)]
pub fn smoter(
    d: &Dataset,
    f: &RelevanceFunction,
    t_r: f64,
    k: usize,
    over_pct: f64,
    under_pct: f64,
    seed: u64,
) -> Result<Dataset> {
    check_threshold(t_r)?;
    check_over_pct(over_pct)?;
    check_under_pct(under_pct)?;
    if k < 1 {
        return Err(invalid("k", "must be at least 1"));
    }
    let (rare, normal) = partition_by_relevance(d.target(), f, t_r);
    if rare.len() < 2 {
        return Err(Error::TooFewRareCases {
            needed: 2,
            found: rare.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut keep = rare.clone();
    keep.extend(sample_normals(&normal, under_pct, &mut rng));

    let nbrs = rare_neighbours(d, &rare, k);
    let count = ceil_count(rare.len(), over_pct);
    let mut rows = Matrix::zeros(0, d.d());
    let mut ys = Vec::with_capacity(count);
    for s in seed_schedule(rare.len(), count, &mut rng) {
        let (nb, _) = nbrs[s][rng.random_range(0..nbrs[s].len())];
        let (i, j) = (rare[s], rare[nb]);
        let (x, y) = interpolate(d.row(i), d.target()[i], d.row(j), d.target()[j], d.categorical(), &mut rng);
        rows.push_row(&x)?;
        ys.push(y);
    }
    assemble(d, keep, Some((rows, ys)))
}

/// Introduction of Gaussian noise: under-samples normal rows and appends
/// noisy replicas of rare rows.
#[allow(clippy::too_many_arguments)]
pub fn gaussian_noise(
    d: &Dataset,
    f: &RelevanceFunction,
    t_r: f64,
    delta: f64,
    over_pct: f64,
    under_pct: f64,
    seed: u64,
) -> Result<Dataset> {
    check_threshold(t_r)?;
    check_over_pct(over_pct)?;
    check_under_pct(under_pct)?;
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    let (rare, normal) = partition_by_relevance(d.target(), f, t_r);
    if rare.is_empty() {
        return Err(Error::NoRareCases);
    }
    let mut rng = rng_from_seed(seed);
    let mut keep = rare.clone();
    keep.extend(sample_normals(&normal, under_pct, &mut rng));

    let sds = column_sds(d);
    let sd_y = stats::sample_sd(d.target());
    let count = ceil_count(rare.len(), over_pct);
    let mut rows = Matrix::zeros(0, d.d());
    let mut ys = Vec::with_capacity(count);
    for s in seed_schedule(rare.len(), count, &mut rng) {
        let i = rare[s];
        let x: Vec<f64> = perturb(d.row(i), d.categorical(), |j| delta * sds[j], &mut rng);
        let y = d.target()[i] + delta * sd_y * normal_draw(&mut rng);
        rows.push_row(&x)?;
        ys.push(y);
    }
    assemble(d, keep, Some((rows, ys)))
}

fn perturb(
    row: &[f64],
    categorical: &[bool],
    scale: impl Fn(usize) -> f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    row.iter()
        .enumerate()
        .map(|(j, &v)| {
            let z = normal_draw(rng);
            if categorical[j] {
                v
            } else {
                v + scale(j) * z
            }
        })
        .collect()
}

/// SMOGN: SmoteR interpolation for close neighbours, Gaussian noise around
/// the seed otherwise.
///
/// A neighbour is close when its distance to the seed is below half the
/// median distance from the seed to its `k` nearest rare neighbours.
#[allow(clippy::too_many_arguments)]
pub fn smogn(
    d: &Dataset,
    f: &RelevanceFunction,
    t_r: f64,
    k: usize,
    delta: f64,
    over_pct: f64,
    under_pct: f64,
    seed: u64,
) -> Result<Dataset> {
    smogn_traced(d, f, t_r, k, delta, over_pct, under_pct, seed).map(|(out, _)| out)
}

/// [`smogn`] plus, for every generated row, whether it was interpolated.
#[allow(clippy::too_many_arguments)]
pub(crate) fn smogn_traced(
    d: &Dataset,
    f: &RelevanceFunction,
    t_r: f64,
    k: usize,
    delta: f64,
    over_pct: f64,
    under_pct: f64,
    seed: u64,
) -> Result<(Dataset, Vec<bool>)> {
    check_threshold(t_r)?;
    check_over_pct(over_pct)?;
    check_under_pct(under_pct)?;
    if k < 1 {
        return Err(invalid("k", "must be at least 1"));
    }
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    let (rare, normal) = partition_by_relevance(d.target(), f, t_r);
    if rare.len() < 2 {
        return Err(Error::TooFewRareCases {
            needed: 2,
            found: rare.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut keep = rare.clone();
    keep.extend(sample_normals(&normal, under_pct, &mut rng));

    let nbrs = rare_neighbours(d, &rare, k);
    let half_median: Vec<f64> = nbrs
        .iter()
        .map(|nb| {
            let dists: Vec<f64> = nb.iter().map(|&(_, dist)| dist).collect();
            stats::median(&dists) / 2.0
        })
        .collect();
    let sds = column_sds(d);
    let sd_y = stats::sample_sd(d.target());
    let count = ceil_count(rare.len(), over_pct);
    let mut rows = Matrix::zeros(0, d.d());
    let mut ys = Vec::with_capacity(count);
    let mut trace = Vec::with_capacity(count);
    for s in seed_schedule(rare.len(), count, &mut rng) {
        let (nb, dist) = nbrs[s][rng.random_range(0..nbrs[s].len())];
        let (i, j) = (rare[s], rare[nb]);
        let max_d = half_median[s];
        trace.push(dist < max_d);
        let (x, y) = if dist < max_d {
            interpolate(d.row(i), d.target()[i], d.row(j), d.target()[j], d.categorical(), &mut rng)
        } else {
            let x = perturb(d.row(i), d.categorical(), |c| (delta * sds[c]).min(max_d), &mut rng);
            (x, d.target()[i] + delta * sd_y * normal_draw(&mut rng))
        };
        rows.push_row(&x)?;
        ys.push(y);
    }
    Ok((assemble(d, keep, Some((rows, ys)))?, trace))
}

/// Weighted sample of `count` distinct positions, probability proportional
/// to `weights` (Efraimidis–Spirakis keys). Zero weights are never chosen.
fn weighted_without_replacement(weights: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w > 0.0)
        .map(|(i, &w)| {
            let u: f64 = rng.random();
            // log(u) / w orders like u^(1/w)
            (libm::log(u.max(f64::MIN_POSITIVE)) / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(count);
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// WERCS: relevance-weighted over-sampling combined with
/// (1 - relevance)-weighted under-sampling. Needs no threshold.
pub fn wercs(
    d: &Dataset,
    f: &RelevanceFunction,
    over_fraction: f64,
    under_fraction: f64,
    seed: u64,
) -> Result<Dataset> {
    for (name, v) in [("over_fraction", over_fraction), ("under_fraction", under_fraction)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(name, "must lie in [0, 1]"));
        }
    }
    let n = d.n();
    let phi = f.phi_all(d.target());
    let mut rng = rng_from_seed(seed);

    let n_over = ceil_count(n, over_fraction);
    let mut appended = Vec::with_capacity(n_over);
    if n_over > 0 {
        let dist = WeightedIndex::new(&phi).map_err(|_| Error::ZeroWeights)?;
        appended.extend((0..n_over).map(|_| dist.sample(&mut rng)));
    }

    let n_under = ceil_count(n, under_fraction);
    let inverse: Vec<f64> = phi.iter().map(|p| 1.0 - p).collect();
    let removed = weighted_without_replacement(&inverse, n_under, &mut rng);
    let mut keep_mask = vec![true; n];
    for i in removed {
        keep_mask[i] = false;
    }
    let mut idx: Vec<usize> = (0..n).filter(|&i| keep_mask[i]).collect();
    idx.extend(appended);
    Ok(d.select(&idx))
}
