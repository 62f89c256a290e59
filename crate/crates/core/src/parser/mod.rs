//! Source ingestion: directory walk, per-file parsing and cross-file
//! resolution into a [`CodeModel`](crate::model::CodeModel).

mod java;
pub mod lexer;
mod resolve;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CodeModel, Diagnostic};

pub use java::{parse_source, RawFile};
pub use resolve::resolve;

/// Parses every `.java` file under `source_root` into one model.
///
/// Files that fail to parse become diagnostics on the returned model, not
/// errors; a release without a single parsable class is an error.
pub fn parse_release(source_root: &Path, release: &str) -> Result<CodeModel> {
    if !source_root.is_dir() {
        return Err(Error::Input(format!(
            "source root {} is not a directory",
            source_root.display()
        )));
    }
    let mut paths = Vec::new();
    collect_sources(source_root, &mut paths)?;
    paths.sort();

    let parsed: Vec<std::result::Result<RawFile, Diagnostic>> = paths
        .par_iter()
        .map(|path| {
            let text = std::fs::read_to_string(path).map_err(|e| Diagnostic {
                file: path.clone(),
                line: 0,
                message: format!("unreadable: {e}"),
            })?;
            let rel = path.strip_prefix(source_root).unwrap_or(path).to_path_buf();
            java::parse_source(rel.clone(), &text).map_err(|e| Diagnostic {
                file: rel,
                line: e.line,
                message: e.message,
            })
        })
        .collect();

    let mut files = Vec::new();
    let mut diagnostics = Vec::new();
    for item in parsed {
        match item {
            Ok(f) => files.push(f),
            Err(d) => diagnostics.push(d),
        }
    }

    let mut model = resolve::resolve(release, &files);
    model.diagnostics.extend(diagnostics);
    if model.is_empty() {
        return Err(Error::EmptyModel {
            release: release.to_string(),
        });
    }
    Ok(model)
}

fn collect_sources(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_sources(&path, out)?;
        } else if path.extension().and_then(|e| e.to_str()) == Some("java") {
            out.push(path);
        }
    }
    Ok(())
}
