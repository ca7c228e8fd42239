//! Dataset representation, table ingestion, holdout splitting and seed derivation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::stats;

/// Numeric feature matrix plus a continuous target.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    name: String,
    features: Matrix,
    target: Vec<f64>,
    feature_names: Vec<String>,
    categorical: Vec<bool>,
}

impl Dataset {
    /// Builds a dataset with all columns numeric.
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        target: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let categorical = alloc::vec![false; features.cols()];
        Self::with_categorical(name, features, target, feature_names, categorical)
    }

    pub fn with_categorical(
        name: impl Into<String>,
        features: Matrix,
        target: Vec<f64>,
        feature_names: Vec<String>,
        categorical: Vec<bool>,
    ) -> Result<Self> {
        if features.rows() != target.len() {
            return Err(Error::LengthMismatch {
                left: features.rows(),
                right: target.len(),
            });
        }
        if features.cols() == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if feature_names.len() != features.cols() || categorical.len() != features.cols() {
            return Err(Error::InvalidDataset(
                "feature metadata does not match column count".into(),
            ));
        }
        if features.as_slice().iter().chain(&target).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite value".into()));
        }
        Ok(Dataset {
            name: name.into(),
            features,
            target,
            feature_names,
            categorical,
        })
    }

    /// Convenience constructor from row slices, naming columns `x1..xd`.
    pub fn from_rows<R: AsRef<[f64]>>(name: &str, rows: &[R], target: &[f64]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let features = Matrix::from_rows(rows, d)?;
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        Self::new(name, features, target.to_vec(), names)
    }

    /// Checks the invariants required of an ingested dataset: at least two
    /// rows and a non-constant target.
    pub fn check_invariants(&self) -> Result<()> {
        if self.n() < 2 {
            return Err(Error::TooFewRows(self.n()));
        }
        let first = self.target[0];
        if self.target.iter().all(|&y| y == first) {
            return Err(Error::ConstantTarget);
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.target.len()
    }

    pub fn d(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn categorical(&self) -> &[bool] {
        &self.categorical
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    /// Rows picked by index (repeats allowed), keeping the schema.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(idx),
            target: idx.iter().map(|&i| self.target[i]).collect(),
            feature_names: self.feature_names.clone(),
            categorical: self.categorical.clone(),
        }
    }

    /// Same schema with extra rows appended.
    pub fn extended(&self, rows: &Matrix, target: &[f64]) -> Result<Dataset> {
        let mut out = self.clone();
        for (r, &y) in rows.iter_rows().zip(target) {
            out.features.push_row(r)?;
            out.target.push(y);
        }
        Ok(out)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Dataset {
        self.name = name.into();
        self
    }
}

/// A train/test partition of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Shuffled holdout split; `ceil(n * test_fraction)` rows go to the test side.
pub fn split_holdout(d: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid("test_fraction", "must lie in (0, 1)"));
    }
    let n = d.n();
    let n_test = libm::ceil(n as f64 * test_fraction) as usize;
    if n_test < 1 || n_test >= n {
        return Err(Error::TooFewRows(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    let (test_idx, train_idx) = idx.split_at(n_test);
    let mut train_idx = train_idx.to_vec();
    let mut test_idx = test_idx.to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(SplitPair {
        train: d.select(&train_idx),
        test: d.select(&test_idx),
        seed,
    })
}

/// Deterministic seed from a master seed and an ordered list of labels.
///
/// SHA-256 over the little-endian master seed followed by each label with a
/// length prefix, truncated to 64 bits.
pub fn derive_seed<S: AsRef<str>>(master: u64, labels: &[S]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for l in labels {
        let bytes = l.as_ref().as_bytes();
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}

/// The generator used for every random decision in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which column of a table holds the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl TargetColumn {
    /// Integers are read as indices, anything else as a column name.
    pub fn parse(s: &str) -> TargetColumn {
        match s.trim().parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.trim().to_string()),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "?" || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan")
}

/// Converts a table of text cells into a clean [`Dataset`].
///
/// Non-numeric columns are integer-encoded in order of first appearance,
/// rows with a missing target are dropped and missing feature cells take the
/// median of their column.
pub fn dataset_from_table<R: AsRef<[String]>>(
    name: &str,
    header: &[String],
    rows: &[R],
    target: &TargetColumn,
) -> Result<Dataset> {
    let width = header.len();
    let t = match target {
        TargetColumn::Index(i) if *i < width => *i,
        TargetColumn::Index(i) => return Err(Error::MissingColumn(format!("index {i}"))),
        TargetColumn::Name(n) => header
            .iter()
            .position(|h| h.trim() == n)
            .ok_or_else(|| Error::MissingColumn(n.clone()))?,
    };
    if width < 2 {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.as_ref().len() != width {
            return Err(Error::InvalidDataset(format!(
                "row {} has {} cells, expected {width}",
                i + 1,
                r.as_ref().len()
            )));
        }
    }

    let mut target_values = Vec::new();
    let mut kept = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let cell = &r.as_ref()[t];
        if is_missing(cell) {
            continue;
        }
        let y: f64 = cell.trim().parse().map_err(|_| {
            Error::InvalidDataset(format!("non-numeric target `{}` in row {}", cell.trim(), i + 1))
        })?;
        if !y.is_finite() {
            continue;
        }
        target_values.push(y);
        kept.push(i);
    }
    if kept.len() < 2 {
        return Err(Error::TooFewRows(kept.len()));
    }

    let feature_cols: Vec<usize> = (0..width).filter(|&j| j != t).collect();
    let mut features = Matrix::zeros(kept.len(), feature_cols.len());
    let mut categorical = Vec::with_capacity(feature_cols.len());
    for (out_j, &j) in feature_cols.iter().enumerate() {
        let cells: Vec<&str> = kept.iter().map(|&i| rows[i].as_ref()[j].as_str()).collect();
        let numeric = cells
            .iter()
            .filter(|c| !is_missing(c))
            .all(|c| c.trim().parse::<f64>().map(f64::is_finite).unwrap_or(false));
        let mut values: Vec<Option<f64>> = Vec::with_capacity(cells.len());
        if numeric {
            values.extend(cells.iter().map(|c| {
                if is_missing(c) {
                    None
                } else {
                    c.trim().parse::<f64>().ok()
                }
            }));
        } else {
            let mut codes: BTreeMap<&str, f64> = BTreeMap::new();
            for c in &cells {
                if is_missing(c) {
                    values.push(None);
                    continue;
                }
                let next = codes.len() as f64;
                values.push(Some(*codes.entry(c.trim()).or_insert(next)));
            }
        }
        categorical.push(!numeric);
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        let fill = if present.is_empty() {
            0.0
        } else {
            stats::median(&present)
        };
        for (i, v) in values.iter().enumerate() {
            features.set(i, out_j, v.unwrap_or(fill));
        }
    }
    let names = feature_cols.iter().map(|&j| header[j].trim().to_string()).collect();
    let d = Dataset::with_categorical(name, features, target_values, names, categorical)?;
    d.check_invariants()?;
    Ok(d)
}
