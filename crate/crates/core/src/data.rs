use crate::error::{Error, Result};

/// Named numeric columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Dataset {
    pub fn new<S: Into<String>>(columns: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let mut names: Vec<String> = Vec::with_capacity(columns.len());
        let mut values = Vec::with_capacity(columns.len());
        let mut n_rows = None;
        for (name, col) in columns {
            let name = name.into();
            if names.contains(&name) {
                return Err(Error::DuplicateColumn(name));
            }
            match n_rows {
                None => n_rows = Some(col.len()),
                Some(n) if n != col.len() => {
                    return Err(Error::DimensionMismatch {
                        what: "dataset column length",
                        expected: n,
                        found: col.len(),
                    })
                }
                Some(_) => {}
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("column `{name}`, row {}", row + 1)));
            }
            names.push(name);
            values.push(col);
        }
        let n_rows = n_rows.unwrap_or(0);
        if n_rows == 0 {
            return Err(Error::InvalidParameter("dataset has no rows".into()));
        }
        Ok(Self {
            names,
            columns: values,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }
}
