//! Experiment configuration: one TOML file, every field defaulted.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use metair_core::learners::{FeatureSubsample, LearnerKind, LearnerSpec};
use metair_core::meta_ir::{Approach, GridSpec, DEFAULT_TEST_FRACTION};
use metair_core::metrics::Metric;
use metair_core::resampling::DEFAULT_THRESHOLD;
use metair_core::{ResamplingKind, ResamplingSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::CsvOptions;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerOverride {
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub learning_rate: Option<f64>,
    /// `all` or `sqrt`.
    pub max_features: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResamplerOverride {
    pub k: Option<usize>,
    pub over_pct: Option<f64>,
    pub under_pct: Option<f64>,
    pub delta: Option<f64>,
    pub over_fraction: Option<f64>,
    pub under_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetaLearnerConfig {
    pub kind: String,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub max_features: Option<String>,
}

impl Default for MetaLearnerConfig {
    fn default() -> Self {
        MetaLearnerConfig {
            kind: LearnerKind::RfClf.name().to_string(),
            trees: None,
            max_depth: None,
            min_leaf: None,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Corpus manifest; relative to the config file.
    pub manifest: Option<PathBuf>,
    pub learners: Vec<String>,
    pub resamplers: Vec<String>,
    pub metric: String,
    pub approach: String,
    pub t_r: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub test_fraction: f64,
    pub delimiter: String,
    pub has_header: bool,
    pub meta_learner: MetaLearnerConfig,
    /// Per-learner hyperparameters, keyed by learner name.
    pub learner: BTreeMap<String, LearnerOverride>,
    /// Per-strategy parameters, keyed by strategy name.
    pub resampler: BTreeMap<String, ResamplerOverride>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            manifest: None,
            learners: LearnerKind::REGRESSORS.iter().map(|k| k.name().to_string()).collect(),
            resamplers: ResamplingKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            metric: Metric::F1R.name().to_string(),
            approach: Approach::Independent.name().to_string(),
            t_r: DEFAULT_THRESHOLD,
            seed: 0,
            out: PathBuf::from("out"),
            workers: 1,
            test_fraction: DEFAULT_TEST_FRACTION,
            delimiter: ",".to_string(),
            has_header: true,
            meta_learner: MetaLearnerConfig::default(),
            learner: BTreeMap::new(),
            resampler: BTreeMap::new(),
        }
    }
}

/// Validated view of a config, ready for the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub grid: GridSpec,
    pub approach: Approach,
    pub meta_spec: LearnerSpec,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub manifest: Option<PathBuf>,
    pub csv: CsvOptions,
}

fn apply_learner(spec: &mut LearnerSpec, o: &LearnerOverride, key: &str) -> Result<()> {
    if let Some(v) = o.trees {
        spec.trees = v;
    }
    if let Some(v) = o.max_depth {
        spec.max_depth = Some(v);
    }
    if let Some(v) = o.min_leaf {
        spec.min_leaf = v;
    }
    if let Some(v) = o.learning_rate {
        spec.learning_rate = v;
    }
    if let Some(v) = &o.max_features {
        spec.max_features = match v.to_ascii_lowercase().as_str() {
            "all" => FeatureSubsample::All,
            "sqrt" => FeatureSubsample::Sqrt,
            _ => return Err(Error::config(format!("{key}.max_features"), format!("expected `all` or `sqrt`, got `{v}`"))),
        };
    }
    spec.validate().map_err(|e| Error::config(key, e.to_string()))
}

fn apply_resampler(spec: &mut ResamplingSpec, o: &ResamplerOverride, key: &str) -> Result<()> {
    let p = &mut spec.params;
    if let Some(v) = o.k {
        p.k = v;
    }
    if let Some(v) = o.over_pct {
        p.over_pct = v;
    }
    if let Some(v) = o.under_pct {
        p.under_pct = v;
    }
    if let Some(v) = o.delta {
        p.delta = v;
    }
    if let Some(v) = o.over_fraction {
        p.over_fraction = v;
    }
    if let Some(v) = o.under_fraction {
        p.under_fraction = v;
    }
    spec.validate().map_err(|e| Error::config(key, e.to_string()))
}

impl ExperimentConfig {
    /// Parses TOML; unknown keys are rejected by name.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let key = message
                .split('`')
                .nth(1)
                .filter(|_| message.starts_with("unknown field"))
                .map_or_else(|| "config".to_string(), str::to_string);
            Error::config(key, message)
        })
    }

    /// Reads a config file; a relative manifest path is taken relative to
    /// the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(m), Some(dir)) = (&cfg.manifest, path.parent()) {
            if m.is_relative() {
                cfg.manifest = Some(dir.join(m));
            }
        }
        Ok(cfg)
    }

    /// Canonical JSON of the effective config, hashed with SHA-256.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex(&Sha256::digest(json))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let metric = Metric::from_name(&self.metric)
            .ok_or_else(|| Error::config("metric", format!("unknown metric `{}` (expected f1r or sera)", self.metric)))?;
        let approach = Approach::from_name(&self.approach).ok_or_else(|| {
            Error::config(
                "approach",
                format!("unknown approach `{}` (expected independent, model-first or strategy-first)", self.approach),
            )
        })?;
        if !(0.0..=1.0).contains(&self.t_r) {
            return Err(Error::config("t_r", format!("{} is outside [0, 1]", self.t_r)));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config("test_fraction", "must lie in (0, 1)"));
        }
        let delimiter = match self.delimiter.as_bytes() {
            [b] => *b,
            _ if self.delimiter == "\\t" => b'\t',
            _ => return Err(Error::config("delimiter", "must be a single byte")),
        };

        let mut learner_kinds = Vec::new();
        for (i, name) in self.learners.iter().enumerate() {
            match LearnerKind::from_name(name) {
                Some(k) if k.is_regressor() => learner_kinds.push(k),
                _ => return Err(Error::config(format!("learners[{i}]"), format!("unknown learner `{name}`"))),
            }
        }
        let mut resampler_kinds = Vec::new();
        for (i, name) in self.resamplers.iter().enumerate() {
            match ResamplingKind::from_name(name) {
                Some(k) => resampler_kinds.push(k),
                None => return Err(Error::config(format!("resamplers[{i}]"), format!("unknown strategy `{name}`"))),
            }
        }
        let mut grid = GridSpec::new(&learner_kinds, &resampler_kinds, metric);
        grid.t_r = self.t_r;
        grid.test_fraction = self.test_fraction;

        for (name, o) in &self.learner {
            let key = format!("learner.{name}");
            let kind = LearnerKind::from_name(name).ok_or_else(|| Error::config(&key, format!("unknown learner `{name}`")))?;
            let spec = grid
                .learners
                .iter_mut()
                .find(|s| s.kind == kind)
                .ok_or_else(|| Error::config(&key, "learner is not listed in `learners`"))?;
            apply_learner(spec, o, &key)?;
        }
        for (name, o) in &self.resampler {
            let key = format!("resampler.{name}");
            let kind = ResamplingKind::from_name(name).ok_or_else(|| Error::config(&key, format!("unknown strategy `{name}`")))?;
            let spec = grid
                .resamplers
                .iter_mut()
                .find(|s| s.kind == kind)
                .ok_or_else(|| Error::config(&key, "strategy is not listed in `resamplers`"))?;
            apply_resampler(spec, o, &key)?;
        }
        grid.validate().map_err(|e| Error::config("grid", e.to_string()))?;

        let meta_kind = LearnerKind::from_name(&self.meta_learner.kind)
            .filter(|k| k.is_classifier())
            .ok_or_else(|| Error::config("meta_learner.kind", format!("`{}` is not a classifier", self.meta_learner.kind)))?;
        let mut meta_spec = LearnerSpec::new(meta_kind);
        let m = &self.meta_learner;
        let o = LearnerOverride {
            trees: m.trees,
            max_depth: m.max_depth,
            min_leaf: m.min_leaf,
            learning_rate: None,
            max_features: m.max_features.clone(),
        };
        apply_learner(&mut meta_spec, &o, "meta_learner")?;

        Ok(Resolved {
            grid,
            approach,
            meta_spec,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            manifest: self.manifest.clone(),
            csv: CsvOptions {
                delimiter,
                has_header: self.has_header,
            },
        })
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
