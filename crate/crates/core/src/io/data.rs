use std::path::Path;

use super::IoError;
use crate::samplers::{Dataset, Transform};

/// One number per line; blank lines and lines starting with `#` are skipped,
/// as is anything after a `#` on a data line.
pub fn parse_observations(text: &str, path: &Path) -> Result<Vec<f64>, IoError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let x: f64 = body.parse().map_err(|_| IoError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            text: body.to_string(),
        })?;
        out.push(x);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<Vec<f64>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_observations(&text, path)
}

fn name_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads an observation file, applies `transform` and rescales the data into
/// `[0.05, 0.95]`.
pub fn load_dataset(path: &Path, transform: Transform) -> Result<Dataset, IoError> {
    Dataset::new(name_of(path), read(path)?, transform).map_err(|source| IoError::Data {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads observations that already lie in `[0, 1]` and keeps them as they
/// are.
pub fn load_unit_dataset(path: &Path) -> Result<Dataset, IoError> {
    Dataset::on_unit_interval(name_of(path), read(path)?).map_err(|source| IoError::Data {
        path: path.to_path_buf(),
        source,
    })
}
