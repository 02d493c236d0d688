//! CSV ingestion and emission of point clouds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: false,
        }
    }
}

/// Reads a rectangular numeric CSV: rows are observations, columns coordinates.
pub fn ingest_csv(path: &Path, options: CsvOptions) -> Result<PointCloud> {
    let input_err = |reason: String| Error::Input {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input_err(e.to_string()))?;

    let mut coords = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| input_err(e.to_string()))?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(input_err(format!(
                    "ragged row at line {line}: {} fields, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                input_err(format!(
                    "non-numeric cell '{cell}' at line {line}, column {}",
                    col + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(input_err(format!(
                    "non-finite cell '{cell}' at line {line}, column {}",
                    col + 1
                )));
            }
            coords.push(v);
        }
        rows += 1;
    }
    let Some(d) = width else {
        return Err(input_err("empty file".into()));
    };
    if rows < 3 {
        return Err(input_err(format!("need at least 3 observations, found {rows}")));
    }
    PointCloud::new(coords, d).map_err(|e| input_err(e.to_string()))
}

/// Formats a cloud as CSV with shortest round-trip float representations.
pub fn cloud_to_csv(cloud: &PointCloud, delimiter: char) -> String {
    let mut out = String::with_capacity(cloud.len() * cloud.dim() * 20);
    for row in cloud.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(delimiter);
            }
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(cloud: &PointCloud, path: &Path) -> Result<()> {
    std::fs::write(path, cloud_to_csv(cloud, ','))?;
    Ok(())
}
