//! CSV reader and writer for fluidized-bed operating conditions.
//!
//! The header must contain exactly the columns of
//! [`FluidizedBedRecord::COLUMNS`], in any order.

use std::path::{Path, PathBuf};

use mfgp_core::benchmarks::FluidizedBedRecord;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is empty")]
    Empty { path: PathBuf },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: &'static str },

    #[error("{path}: unexpected column `{column}`")]
    UnexpectedColumn { path: PathBuf, column: String },

    #[error("{path}: row {row} has {got} fields, expected {expected}")]
    Arity {
        path: PathBuf,
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("{path}: row {row}, column `{column}`: `{value}` is not a finite number")]
    NotNumeric {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Rows are numbered from 1 after the header.
pub fn load(path: &Path) -> Result<Vec<FluidizedBedRecord>, LoadError> {
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&bytes, path)
}

pub fn parse(bytes: &[u8], path: &Path) -> Result<Vec<FluidizedBedRecord>, LoadError> {
    let p = || path.to_path_buf();
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(LoadError::Empty { path: p() });
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|source| LoadError::Csv { path: p(), source })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if let Some(extra) = names.iter().find(|n| !FluidizedBedRecord::COLUMNS.contains(n)) {
        return Err(LoadError::UnexpectedColumn {
            path: p(),
            column: extra.to_string(),
        });
    }
    let mut position = [0usize; 8];
    for (k, column) in FluidizedBedRecord::COLUMNS.iter().enumerate() {
        position[k] = names
            .iter()
            .position(|n| n == column)
            .ok_or(LoadError::MissingColumn { path: p(), column })?;
    }

    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|source| LoadError::Csv { path: p(), source })?;
        let row_no = i + 1;
        if row.len() != names.len() {
            return Err(LoadError::Arity {
                path: p(),
                row: row_no,
                got: row.len(),
                expected: names.len(),
            });
        }
        let mut values = [0.0; 8];
        for k in 0..8 {
            let raw = &row[position[k]];
            values[k] = raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| LoadError::NotNumeric {
                path: p(),
                row: row_no,
                column: FluidizedBedRecord::COLUMNS[k].to_string(),
                value: raw.to_string(),
            })?;
        }
        out.push(FluidizedBedRecord::from_row(values));
    }
    if out.is_empty() {
        log::warn!("{}: header present but no data rows", path.display());
    }
    Ok(out)
}

pub fn write(path: &Path, records: &[FluidizedBedRecord]) -> Result<(), LoadError> {
    let csv_err = |source| LoadError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(FluidizedBedRecord::COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record(r.to_row().iter().map(f64::to_string)).map_err(csv_err)?;
    }
    w.flush().map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}
