//! Argument parsing and the stage runner behind the `metair` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use metair_core::meta_features::extract;
use metair_core::meta_ir::{build_meta_dataset, lodo_evaluate, recommend, train_meta};
use metair_core::resampling::apply;
use metair_core::{derive_seed, Dataset, RelevanceFunction, ResamplingKind, TargetColumn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{hex, ExperimentConfig, Resolved};
use crate::error::{Error, Result};
use crate::exec::Pool;
use crate::ingest::{load_corpus, read_dataset, read_manifest, write_dataset};
use crate::persist::{load_bundle, save_bundle};
use crate::report::{self, METADATASET};
use crate::tables::{read_meta_dataset, write_csv, write_meta_dataset, write_meta_features};

#[derive(Debug, Parser)]
#[command(name = "metair", version, about = "Recommends resampling + learner pipelines for imbalanced regression")]
pub struct Cli {
    /// TOML experiment config; every key has a default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// f1r or sera.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// independent, model-first or strategy-first.
    #[arg(long, global = true)]
    pub approach: Option<String>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Grid,
    Lodo,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean one dataset, or every manifest entry, into CSV under the output directory.
    Ingest {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Column name or index; defaults to the last column.
        #[arg(long)]
        target: Option<String>,
    },
    /// Relevance of every target value plus the control points.
    Relevance {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        target: Option<String>,
    },
    /// Apply one strategy to a dataset.
    Resample {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        strategy: String,
    },
    /// The 43 meta-features of one dataset or of the corpus.
    Metafeatures {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        target: Option<String>,
    },
    /// Score the full grid on the corpus and label each dataset.
    BuildMetadataset,
    /// Train the meta-classifiers.
    Train {
        /// Defaults to the output directory's meta-dataset, built if absent.
        #[arg(long)]
        metadataset: Option<PathBuf>,
    },
    /// Zero-shot recommendation for a new dataset.
    Recommend {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        target: Option<String>,
    },
    Evaluate {
        #[arg(long, value_enum, default_value = "lodo")]
        mode: Mode,
    },
    /// Rebuild summary tables from evaluation artifacts.
    Report {
        /// Defaults to the output directory.
        #[arg(long)]
        results: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Relevance { .. } => "relevance",
            Command::Resample { .. } => "resample",
            Command::Metafeatures { .. } => "metafeatures",
            Command::BuildMetadataset => "build-metadataset",
            Command::Train { .. } => "train",
            Command::Recommend { .. } => "recommend",
            Command::Evaluate { mode: Mode::Grid } => "evaluate-grid",
            Command::Evaluate { mode: Mode::Lodo } => "evaluate-lodo",
            Command::Report { .. } => "report",
        }
    }
}

/// What every run leaves next to its artifacts. No timestamps, so reruns
/// are byte-identical.
#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    command: &'a str,
    seed: u64,
    config_sha256: String,
    config: &'a ExperimentConfig,
    artifacts: BTreeMap<String, String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex(&Sha256::digest(bytes)))
}

/// Config file (or defaults) with command-line flags applied on top.
pub fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = &cli.metric {
        cfg.metric = m.clone();
    }
    if let Some(a) = &cli.approach {
        cfg.approach = a.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn corpus(r: &Resolved) -> Result<Vec<Dataset>> {
    let path = r
        .manifest
        .as_ref()
        .ok_or_else(|| Error::config("manifest", "this command needs a corpus manifest"))?;
    load_corpus(&read_manifest(path)?, &r.csv)
}

fn one(path: &Path, target: &Option<String>, r: &Resolved) -> Result<Dataset> {
    let t = target.as_deref().map(TargetColumn::parse);
    read_dataset(path, t.as_ref(), &r.csv)
}

/// Runs one stage; returns what should be printed on stdout.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = effective_config(cli)?;
    let r = cfg.resolve()?;
    let out = &r.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut stdout = String::new();
    let mut art_dir = out.clone();

    let written: Vec<String> = match &cli.command {
        Command::Ingest { dataset, target } => {
            let data = match dataset {
                Some(p) => vec![one(p, target, &r)?],
                None => corpus(&r)?,
            };
            let mut files = Vec::new();
            for d in &data {
                let file = format!("{}.csv", d.name());
                write_dataset(d, &out.join(&file))?;
                stdout.push_str(&format!("{}: n={} d={}\n", d.name(), d.n(), d.d()));
                files.push(file);
            }
            files
        }
        Command::Relevance { dataset, target } => {
            let d = one(dataset, target, &r)?;
            let f = RelevanceFunction::from_target(d.target())?;
            let rows: Vec<Vec<String>> = d
                .target()
                .iter()
                .map(|&y| {
                    let phi = f.phi(y);
                    vec![y.to_string(), phi.to_string(), (phi >= r.grid.t_r).to_string()]
                })
                .collect();
            let values = format!("relevance_{}.csv", d.name());
            write_csv(&out.join(&values), &["y", "phi", "rare"], &rows)?;
            let rows: Vec<Vec<String>> = f
                .control_points()
                .iter()
                .map(|c| vec![c.y.to_string(), c.phi.to_string(), c.dphi.to_string()])
                .collect();
            let points = format!("control_points_{}.csv", d.name());
            write_csv(&out.join(&points), &["y", "phi", "dphi"], &rows)?;
            let rare = d.target().iter().filter(|&&y| f.phi(y) >= r.grid.t_r).count();
            stdout.push_str(&format!("{}: {rare} of {} rows rare at t_R={}\n", d.name(), d.n(), r.grid.t_r));
            vec![values, points]
        }
        Command::Resample {
            dataset,
            target,
            strategy,
        } => {
            let kind = ResamplingKind::from_name(strategy)
                .ok_or_else(|| Error::config("--strategy", format!("unknown strategy `{strategy}`")))?;
            let d = one(dataset, target, &r)?;
            let spec = r
                .grid
                .resamplers
                .iter()
                .find(|s| s.kind == kind)
                .cloned()
                .unwrap_or_else(|| metair_core::ResamplingSpec::new(kind))
                .with_threshold(r.grid.t_r)
                .with_seed(derive_seed(r.seed, &[d.name(), "resample", kind.name()]));
            let f = RelevanceFunction::from_target(d.target())?;
            let res = apply(&spec, &d, &f)?;
            let file = format!("{}_{}.csv", d.name(), kind.name());
            write_dataset(&res, &out.join(&file))?;
            stdout.push_str(&format!("{}: {} -> {} rows\n", kind.name(), d.n(), res.n()));
            vec![file]
        }
        Command::Metafeatures { dataset, target } => {
            let data = match dataset {
                Some(p) => vec![one(p, target, &r)?],
                None => corpus(&r)?,
            };
            let mut rows = Vec::new();
            for d in &data {
                let f = RelevanceFunction::from_target(d.target()).and_then(|f| extract(d, &f));
                match f {
                    Ok(v) => rows.push((d.name().to_string(), v)),
                    Err(e) if data.len() > 1 => log::warn!("{}: skipped: {e}", d.name()),
                    Err(e) => return Err(e.into()),
                }
            }
            rows.sort_by(|a, b| a.0.cmp(&b.0));
            write_meta_features(&out.join("metafeatures.csv"), &rows)?;
            vec!["metafeatures.csv".into()]
        }
        Command::BuildMetadataset => {
            let pool = Pool::new(r.workers)?;
            let m = build_meta_dataset(&corpus(&r)?, &r.grid, r.seed, &pool)?;
            write_meta_dataset(&out.join(METADATASET), &m)?;
            report::write_skipped(out, &m)?;
            stdout.push_str(&format!("{} rows, {} skipped\n", m.rows.len(), m.skipped.len()));
            vec![METADATASET.into(), report::SKIPPED.into()]
        }
        Command::Train { metadataset } => {
            let default = out.join(METADATASET);
            let mut files = Vec::new();
            let m = match metadataset {
                Some(p) => read_meta_dataset(p, r.grid.metric)?,
                None if default.exists() => read_meta_dataset(&default, r.grid.metric)?,
                None => {
                    let pool = Pool::new(r.workers)?;
                    let m = build_meta_dataset(&corpus(&r)?, &r.grid, r.seed, &pool)?;
                    write_meta_dataset(&default, &m)?;
                    files.push(METADATASET.to_string());
                    m
                }
            };
            let bundle = train_meta(&m, r.approach, &r.meta_spec, r.seed)?;
            save_bundle(&bundle, &out.join("bundle.json"))?;
            files.push("bundle.json".into());
            stdout.push_str(&format!("trained {} on {} rows\n", r.approach, m.rows.len()));
            files
        }
        Command::Recommend { dataset, bundle, target } => {
            let b = load_bundle(bundle)?;
            let d = one(dataset, target, &r)?;
            let p = recommend(&d, &b)?;
            let line = format!("{p}\n");
            fs::write(out.join("recommendation.txt"), &line).map_err(|e| Error::io(out.join("recommendation.txt"), e))?;
            stdout.push_str(&line);
            vec!["recommendation.txt".into()]
        }
        Command::Evaluate { mode } => {
            let pool = Pool::new(r.workers)?;
            let data = corpus(&r)?;
            match mode {
                Mode::Grid => {
                    let m = build_meta_dataset(&data, &r.grid, r.seed, &pool)?;
                    report::write_grid(out, &m)?
                }
                Mode::Lodo => {
                    let rep = lodo_evaluate(&data, &r.grid, r.approach, &r.meta_spec, r.seed, &pool)?;
                    for (name, mean) in rep.mean_scores() {
                        stdout.push_str(&format!("{name}: {mean}\n"));
                    }
                    report::write_lodo(out, &rep)?
                }
            }
        }
        Command::Report { results } => {
            // summaries live with the results they summarise
            if let Some(dir) = results {
                art_dir = dir.clone();
            }
            report::report(&art_dir)?
        }
    };

    let mut artifacts = BTreeMap::new();
    for f in &written {
        artifacts.insert(f.clone(), sha256_file(&art_dir.join(f))?);
    }
    let name = cli.command.name();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        command: name,
        seed: r.seed,
        config_sha256: cfg.hash(),
        config: &cfg,
        artifacts,
    };
    let path = art_dir.join(format!("run-{name}.json"));
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Json {
        path: path.clone(),
        source: e,
    })?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(stdout)
}
