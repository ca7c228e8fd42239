//! JSON persistence of trained bundles.

use std::fs;
use std::path::Path;

use metair_core::meta_ir::MetaModelBundle;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BUNDLE_FORMAT: &str = "metair-bundle";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct BundleFile {
    format: String,
    version: u32,
    tool_version: String,
    bundle: MetaModelBundle,
}

pub fn bundle_to_json(bundle: &MetaModelBundle) -> Result<String> {
    let file = BundleFile {
        format: BUNDLE_FORMAT.to_string(),
        version: BUNDLE_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        bundle: bundle.clone(),
    };
    serde_json::to_string(&file).map_err(|e| Error::Json {
        path: "<bundle>".into(),
        source: e,
    })
}

pub fn bundle_from_json(text: &str, path: &Path) -> Result<MetaModelBundle> {
    let file: BundleFile = serde_json::from_str(text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    if file.format != BUNDLE_FORMAT {
        return Err(Error::Format(format!("{}: not a bundle file", path.display())));
    }
    if file.version != BUNDLE_VERSION {
        return Err(Error::Format(format!(
            "{}: bundle version {} is not supported (expected {BUNDLE_VERSION})",
            path.display(),
            file.version
        )));
    }
    Ok(file.bundle)
}

pub fn save_bundle(bundle: &MetaModelBundle, path: &Path) -> Result<()> {
    fs::write(path, bundle_to_json(bundle)?).map_err(|e| Error::io(path, e))
}

pub fn load_bundle(path: &Path) -> Result<MetaModelBundle> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    bundle_from_json(&text, path)
}
