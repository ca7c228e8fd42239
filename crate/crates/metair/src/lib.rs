//! Std companion of `metair-core`: CSV ingestion, corpus manifests, TOML
//! experiment configs, JSON bundles, a rayon executor, report tables and
//! the `metair` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod ingest;
pub mod persist;
pub mod report;
pub mod tables;

pub use error::{Error, Result};
