//! CSV diagnostics: one header line, then one row per sample with every value
//! written as `{:.16e}` (17 significant digits, so parsing returns the same
//! `f64`).

use std::io::{Read, Write};

use ipconv::verification::{DiagnosticsRow, COLUMNS};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header { found: Vec<String>, expected: Vec<&'static str> },
    #[error("row {row}: `{value}` in column `{column}` is not a number")]
    Value { row: usize, column: &'static str, value: String },
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Appends rows to a CSV sink, writing the header on construction.
pub struct DiagnosticsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> DiagnosticsWriter<W> {
    pub fn new(sink: W) -> Result<Self, CsvError> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
        inner.write_record(COLUMNS)?;
        Ok(Self { inner })
    }

    pub fn write_row(&mut self, row: &DiagnosticsRow) -> Result<(), CsvError> {
        self.inner.write_record(row.values().map(format_value))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), CsvError> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W, CsvError> {
        self.inner.into_inner().map_err(|e| CsvError::Io(e.into_error()))
    }
}

/// Reads rows written by [`DiagnosticsWriter`]. Columns not stored in the CSV
/// come back as NaN.
pub fn read_diagnostics(source: impl Read) -> Result<Vec<DiagnosticsRow>, CsvError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(source);
    let header = reader.headers()?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(CsvError::Header { found: header.iter().map(String::from).collect(), expected: COLUMNS.to_vec() });
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let mut values = [0.0; 10];
        for ((v, field), column) in values.iter_mut().zip(record.iter()).zip(COLUMNS) {
            *v = field.parse().map_err(|_| CsvError::Value { row: r + 1, column, value: field.to_string() })?;
        }
        rows.push(DiagnosticsRow::from_values(values));
    }
    Ok(rows)
}

pub fn read_diagnostics_file(path: &std::path::Path) -> Result<Vec<DiagnosticsRow>, CsvError> {
    read_diagnostics(std::fs::File::open(path)?)
}
