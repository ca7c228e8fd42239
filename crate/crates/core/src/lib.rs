//! Meta-learning recommendation of (resampling strategy, learning model)
//! pipelines for imbalanced regression.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and thread pools live in the `metair` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod error;
pub mod learners;
pub mod linalg;
pub mod matrix;
pub mod meta_features;
pub mod meta_ir;
pub mod metrics;
pub mod relevance;
pub mod resampling;
pub mod stats;

pub use dataset::{dataset_from_table, derive_seed, split_holdout, Dataset, SplitPair, TargetColumn};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use relevance::{boxplot_control_points, split_rare_normal, ControlPoint, RelevanceFunction};
pub use resampling::{ResamplingKind, ResamplingParams, ResamplingSpec};
