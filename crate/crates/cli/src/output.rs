//! Byte-stable CSV and JSON artifacts.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// One file to be written under the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub contents: String,
}

pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}

/// Header row plus one line per row, LF endings.
pub fn csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    for a in artifacts {
        let path = dir.join(a.name);
        fs::write(&path, &a.contents).map_err(|source| CliError::Write { path, source })?;
    }
    Ok(())
}
