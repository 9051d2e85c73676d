//! CSV ingestion for datasets and coefficient points.

use std::fs;
use std::path::Path;

use occam_core::{Dataset, Error};

use crate::error::{CliError, CliResult};

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse_table(path: &Path, bytes: &[u8]) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(index + 2, |p| p.line() as usize);
        let row = record
            .iter()
            .zip(&headers)
            .map(|(cell, name)| {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(CliError::parse(
                        path,
                        line,
                        format!("row {}, column `{name}`: cannot read `{cell}` as a finite number", index + 1),
                    )),
                }
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(1, |p| p.line() as usize);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    CliError::parse(path, line, message)
}

/// Reads a headed CSV file of numeric columns.
pub fn parse_dataset(path: &Path, bytes: &[u8]) -> CliResult<Dataset> {
    let table = parse_table(path, bytes)?;
    if table.rows.is_empty() {
        return Err(CliError::parse(path, 1, "dataset has no data rows"));
    }
    let mut columns: Vec<(String, Vec<f64>)> = table
        .headers
        .into_iter()
        .map(|h| (h, Vec::with_capacity(table.rows.len())))
        .collect();
    for row in table.rows {
        for (col, v) in columns.iter_mut().zip(row) {
            col.1.push(v);
        }
    }
    Dataset::new(columns).map_err(|e| match e {
        Error::DuplicateColumn(name) => CliError::parse(path, 1, format!("duplicate column `{name}`")),
        other => CliError::Core(other),
    })
}

/// Reads coefficient points, one per row. An empty file yields no points.
pub fn parse_points(path: &Path, bytes: &[u8], m: usize) -> CliResult<Vec<Vec<f64>>> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let table = parse_table(path, bytes)?;
    if table.headers.len() != m {
        return Err(CliError::Core(Error::DimensionMismatch {
            what: "coefficient point columns",
            expected: m,
            found: table.headers.len(),
        }));
    }
    Ok(table.rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("data.csv")
    }

    #[test]
    fn reads_columns() {
        let d = parse_dataset(p(), b"x, y\n1,2\n3, 4.5\n").unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.column("y").unwrap(), &[2.0, 4.5]);
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let err = parse_dataset(p(), b"x,y\n1,2\n3,abc\n").unwrap_err();
        let msg = err.to_string();
        assert_eq!(err.exit_code(), 2);
        assert!(msg.contains("data.csv:3"), "{msg}");
        assert!(msg.contains("row 2") && msg.contains("`y`") && msg.contains("abc"), "{msg}");
    }

    #[test]
    fn ragged_and_empty_inputs() {
        assert_eq!(parse_dataset(p(), b"x,y\n1,2\n3\n").unwrap_err().exit_code(), 2);
        assert_eq!(parse_dataset(p(), b"x,y\n").unwrap_err().exit_code(), 2);
        assert_eq!(parse_dataset(p(), b"x,x\n1,2\n").unwrap_err().exit_code(), 2);
        assert_eq!(parse_dataset(p(), b"x\nnan\n").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn points() {
        assert!(parse_points(p(), b"", 2).unwrap().is_empty());
        assert!(parse_points(p(), b"a,b\n", 2).unwrap().is_empty());
        assert_eq!(parse_points(p(), b"a,b\n1,2\n", 2).unwrap(), vec![vec![1.0, 2.0]]);
        assert_eq!(parse_points(p(), b"a\n1\n", 2).unwrap_err().exit_code(), 1);
    }
}
