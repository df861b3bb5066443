// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Plain-text file formats: symbol sequences and weight matrices.

use std::fs;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// Parses a newline-delimited sequence of symbol indices. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_sequence(text: &str) -> Result<Vec<usize>> {
    let mut seq = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line
            .parse::<usize>()
            .map_err(|e| Error::parse(i + 1, format!("bad symbol {line:?}: {e}")))?;
        seq.push(v);
    }
    Ok(seq)
}

pub fn format_sequence(seq: &[usize]) -> String {
    let mut out = String::with_capacity(seq.len() * 3);
    for s in seq {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

pub fn read_sequence(path: &Path) -> Result<Vec<usize>> {
    parse_sequence(&fs::read_to_string(path)?)
}

pub fn write_sequence(path: &Path, seq: &[usize]) -> Result<()> {
    fs::write(path, format_sequence(seq))?;
    Ok(())
}

/// Number of symbols implied by a sequence (max index + 1).
pub fn alphabet_size(seq: &[usize]) -> usize {
    seq.iter().max().map_or(0, |m| m + 1)
}

/// Formats an n×k row-major matrix as headerless CSV, full precision.
pub fn format_weights(w: &[f64], k: usize) -> String {
    let mut out = String::new();
    for row in w.chunks(k.max(1)) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a headerless numeric CSV into rows. All rows must share a width.
pub fn parse_weights(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| {
                let c = c.trim();
                c.parse::<f64>()
                    .map_err(|e| Error::parse(i + 1, format!("bad number {c:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    i + 1,
                    format!("row has {} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(i + 1, "non-finite value"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid("weight file is empty"));
    }
    Ok(rows)
}

pub fn read_weights(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_weights(&fs::read_to_string(path)?)
}

pub fn write_weights(path: &Path, w: &[f64], k: usize) -> Result<()> {
    fs::write(path, format_weights(w, k))?;
    Ok(())
}

/// File name used for the snapshot taken at `step`.
pub fn snapshot_name(step: u64) -> String {
    format!("weights_{step}.csv")
}

/// Lists `weights_<step>.csv` files in a directory, sorted by step.
pub fn list_snapshots(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(step) = name
            .strip_prefix("weights_")
            .and_then(|r| r.strip_suffix(".csv"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            found.push((step, path));
        }
    }
    found.sort();
    Ok(found)
}
