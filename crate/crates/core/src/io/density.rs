use std::path::Path;

use super::archive::format_number;
use super::IoError;
use crate::geometry::{normalize_pdf, Grid, GridPdf};

/// Densities on a common grid, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub grid: Grid,
    pub rows: Vec<GridPdf>,
}

/// CSV with a header row of abscissae followed by one density per row.
pub fn write_density_matrix(path: &Path, rows: &[GridPdf]) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    write_density_rows(file, rows).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// [`write_density_matrix`] to any writer.
pub fn write_density_rows<W: std::io::Write>(out: W, rows: &[GridPdf]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.grid().abscissae().iter().map(|x| format_number(*x)))?;
    }
    for r in rows {
        w.write_record(r.values().iter().map(|x| format_number(*x)))?;
    }
    w.flush()
}

/// Reads a density matrix. The header must be the abscissae of a uniform
/// grid on `[0, 1]`; rows are renormalized on that grid.
pub fn read_density_matrix(path: &Path) -> Result<DensityMatrix, IoError> {
    let invalid = |message: String| IoError::Density {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| IoError::Read {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| invalid(format!("line {}: {e}", i + 1)))?;
        let row = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("line {}: cannot parse `{f}`", i + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        records.push(row);
    }
    let (header, body) = records
        .split_first()
        .ok_or_else(|| invalid("file is empty".into()))?;
    let grid = Grid::new(header.len()).map_err(|e| invalid(e.to_string()))?;
    for (i, (x, y)) in header.iter().zip(grid.abscissae()).enumerate() {
        if (x - y).abs() > 1e-9 {
            return Err(invalid(format!(
                "header entry {i} is {x}, expected {y} for a uniform grid"
            )));
        }
    }
    let rows = body
        .iter()
        .enumerate()
        .map(|(i, r)| {
            normalize_pdf(grid, r.clone()).map_err(|e| invalid(format!("row {}: {e}", i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DensityMatrix { grid, rows })
}
