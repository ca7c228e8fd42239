//! Planted two-regime corpus shared by the acceptance suite and CLI tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use metair::ingest::write_dataset;
use metair_core::meta_ir::{meta_row, Executor, GridSpec, MetaRow};
use metair_core::metrics::Metric;
use metair_core::{derive_seed, Dataset, ResamplingKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Master seed of every planted experiment.
pub const SEED: u64 = 7;
/// Regime A lies below this percentage of rare cases, regime B at or above it.
pub const P_RARE_SPLIT: f64 = 13.0;

#[derive(Debug, Clone, Copy)]
pub struct Regime {
    pub tag: char,
    /// Rows are drawn from `base_n .. base_n + 150`.
    pub base_n: usize,
    /// Width of the band of `x1` where rare targets can occur.
    pub band: f64,
    /// Chance that a row in the band is rare.
    pub rare_rate: f64,
    pub planted: ResamplingKind,
}

pub const REGIME_A: Regime = Regime {
    tag: 'A',
    base_n: 200,
    band: 0.3,
    rare_rate: 0.2,
    planted: ResamplingKind::RandomOver,
};

pub const REGIME_B: Regime = Regime {
    tag: 'B',
    base_n: 100,
    band: 0.4,
    rare_rate: 0.5,
    planted: ResamplingKind::RandomUnder,
};

impl Regime {
    pub fn name(&self, idx: usize) -> String {
        format!("{}{idx:03}", self.tag)
    }

    /// Three uniform features. Normal targets follow `x2` plus a wave in
    /// `x3` with noise; rare ones sit near a level in 2.5..4 and only appear
    /// when `x1` is inside the band. Wave, noise and level vary per dataset
    /// so that fit-quality features overlap across regimes.
    pub fn candidate(&self, idx: usize) -> Dataset {
        let name = self.name(idx);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(2024, &[name.as_str()]));
        let n = self.base_n + (rng.random::<f64>() * 150.0) as usize;
        let noise = 0.1 + 0.3 * rng.random::<f64>();
        let level = 2.5 + 1.5 * rng.random::<f64>();
        let wave = 0.6 * rng.random::<f64>();
        let freq = std::f64::consts::TAU * (1.0 + 2.0 * rng.random::<f64>());
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let x: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let rare = x[0] > 1.0 - self.band && rng.random::<f64>() < self.rare_rate;
            let e: f64 = StandardNormal.sample(&mut rng);
            y.push(if rare { level + 0.3 * e } else { x[1] + wave * (freq * x[2]).sin() + noise * e });
            rows.push(x);
        }
        Dataset::from_rows(&name, &rows, &y).expect("finite synthetic data")
    }

    pub fn in_range(&self, p_rare: f64) -> bool {
        match self.tag {
            'A' => p_rare < P_RARE_SPLIT,
            _ => p_rare >= P_RARE_SPLIT,
        }
    }
}

pub fn p_rare(row: &MetaRow) -> f64 {
    row.features.get("p.rare").expect("p.rare is a meta-feature")
}

pub struct Planted {
    pub datasets: Vec<Dataset>,
    /// Candidates generated per regime before enough were kept.
    pub tried: [usize; 2],
}

/// The first `per_regime` candidates of each regime whose default grid names
/// the planted strategy as oracle-best and whose p.rare falls on the
/// regime's side of [`P_RARE_SPLIT`]. Gives up after `max_tries`.
pub fn planted_corpus<E: Executor>(per_regime: usize, max_tries: usize, exec: &E) -> Planted {
    let grid = GridSpec::full(Metric::F1R);
    let mut datasets = Vec::new();
    let mut tried = [0, 0];
    for (slot, regime) in [REGIME_A, REGIME_B].into_iter().enumerate() {
        let mut kept = 0;
        let mut next = 0;
        while kept < per_regime && next < max_tries {
            let batch: Vec<usize> = (next..(next + 16).min(max_tries)).collect();
            next += batch.len();
            let results = exec.map(batch, |i| {
                let d = regime.candidate(i);
                let row = meta_row(&d, &grid, SEED).ok();
                (d, row)
            });
            for (d, row) in results {
                tried[slot] += 1;
                let Some(row) = row else { continue };
                if row.best.resampler == regime.planted && regime.in_range(p_rare(&row)) {
                    datasets.push(d);
                    kept += 1;
                    if kept == per_regime {
                        break;
                    }
                }
            }
        }
    }
    Planted { datasets, tried }
}

/// Writes each dataset as `<name>.csv` plus a manifest naming the target
/// column; returns the manifest path.
pub fn write_corpus(dir: &Path, corpus: &[Dataset]) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let mut manifest = String::new();
    for d in corpus {
        let file = format!("{}.csv", d.name());
        write_dataset(d, &dir.join(&file)).unwrap();
        manifest.push_str(&format!("{file} target\n"));
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).unwrap();
    path
}

/// A few small datasets with a heavy upper tail, for quick CLI runs.
pub fn toy_corpus(count: usize) -> Vec<Dataset> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
            let n = 60 + 10 * k;
            let mut rows = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for i in 0..n {
                let x: [f64; 2] = [rng.random(), rng.random()];
                let e: f64 = StandardNormal.sample(&mut rng);
                y.push(if i % 8 == 0 { 10.0 + x[0] + e } else { x[1] + 0.1 * e });
                rows.push(x);
            }
            Dataset::from_rows(&format!("toy{k}"), &rows, &y).unwrap()
        })
        .collect()
}
