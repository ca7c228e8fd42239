//! CSV datasets and corpus manifests.

use std::fs;
use std::path::{Path, PathBuf};

use metair_core::{dataset_from_table, Dataset, TargetColumn};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
        }
    }
}

/// Header and text cells of a delimited file. Headerless files get
/// columns `c0, c1, ...`.
pub fn read_table(path: &Path, opts: &CsvOptions) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let header = if opts.has_header {
        rdr.headers()
            .map_err(|e| Error::csv(path, e))?
            .iter()
            .map(str::to_string)
            .collect()
    } else {
        let width = rows.first().map_or(0, Vec::len);
        (0..width).map(|j| format!("c{j}")).collect()
    };
    Ok((header, rows))
}

/// Dataset name taken from a file path: its stem.
pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

/// Reads a CSV dataset. `None` for the target means the last column.
pub fn read_dataset(path: &Path, target: Option<&TargetColumn>, opts: &CsvOptions) -> Result<Dataset> {
    let (header, rows) = read_table(path, opts)?;
    let target = match target {
        Some(t) => t.clone(),
        None => TargetColumn::Index(header.len().saturating_sub(1)),
    };
    Ok(dataset_from_table(&dataset_name(path), &header, &rows, &target)?)
}

/// Writes features then the target, with a `target` column header.
pub fn write_dataset(d: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header: Vec<&str> = d.feature_names().iter().map(String::as_str).collect();
    header.push("target");
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for i in 0..d.n() {
        let mut rec: Vec<String> = d.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(d.target()[i].to_string());
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub target: TargetColumn,
}

/// Parses a corpus manifest: one `<path> <target>` pair per line, blank lines
/// and `#` comments ignored. Relative paths resolve against the manifest's
/// directory.
pub fn parse_manifest(text: &str, base: &Path, source: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: &str| Error::Manifest {
            path: source.to_path_buf(),
            line: i + 1,
            message: message.to_string(),
        };
        let (path, target) = line
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| bad("expected `<path> <target column>`"))?;
        let path = Path::new(path.trim());
        out.push(ManifestEntry {
            path: if path.is_absolute() { path.to_path_buf() } else { base.join(path) },
            target: TargetColumn::parse(target),
        });
    }
    if out.is_empty() {
        return Err(Error::Manifest {
            path: source.to_path_buf(),
            line: 0,
            message: "no datasets listed".to_string(),
        });
    }
    Ok(out)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base, path)
}

/// Loads every dataset of a manifest. Unreadable datasets are logged and
/// skipped; an error only when nothing loads or two files share a name.
pub fn load_corpus(entries: &[ManifestEntry], opts: &CsvOptions) -> Result<Vec<Dataset>> {
    let mut corpus: Vec<Dataset> = Vec::new();
    for e in entries {
        match read_dataset(&e.path, Some(&e.target), opts) {
            Ok(d) => {
                if corpus.iter().any(|c| c.name() == d.name()) {
                    return Err(Error::Format(format!("duplicate dataset name `{}`", d.name())));
                }
                corpus.push(d);
            }
            Err(err) => log::warn!("{}: skipped: {err}", e.path.display()),
        }
    }
    if corpus.is_empty() {
        return Err(metair_core::Error::AllDatasetsFailed.into());
    }
    Ok(corpus)
}
