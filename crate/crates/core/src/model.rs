//! Model specifications and basis expansion.
//!
//! A [`ModelSpec`] lists basis terms; each term expands to one or more design
//! columns. Polynomial terms expand to the powers `x, x², …, x^d`; truncated
//! power terms expand to one column `max(x − t, 0)^d` per knot `t`, so a full
//! cubic spline is written as `intercept + poly(x, 3) + tpow(x, 3, knots)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Intercept,
    Raw {
        column: String,
    },
    Polynomial {
        column: String,
        degree: u32,
    },
    TruncatedPower {
        column: String,
        degree: u32,
        knots: Vec<f64>,
    },
}

impl Term {
    pub fn raw(column: impl Into<String>) -> Self {
        Term::Raw {
            column: column.into(),
        }
    }

    pub fn polynomial(column: impl Into<String>, degree: u32) -> Self {
        Term::Polynomial {
            column: column.into(),
            degree,
        }
    }

    pub fn truncated_power(column: impl Into<String>, degree: u32, knots: Vec<f64>) -> Self {
        Term::TruncatedPower {
            column: column.into(),
            degree,
            knots,
        }
    }

    pub fn column(&self) -> Option<&str> {
        match self {
            Term::Intercept => None,
            Term::Raw { column }
            | Term::Polynomial { column, .. }
            | Term::TruncatedPower { column, .. } => Some(column),
        }
    }

    /// Number of design columns this term produces.
    pub fn width(&self) -> usize {
        match self {
            Term::Intercept | Term::Raw { .. } => 1,
            Term::Polynomial { degree, .. } => *degree as usize,
            Term::TruncatedPower { knots, .. } => knots.len(),
        }
    }

    fn validate(&self, data: &Dataset) -> Result<()> {
        let Some(name) = self.column() else {
            return Ok(());
        };
        let values = data.column(name)?;
        match self {
            Term::Polynomial { degree, .. } if *degree == 0 => Err(Error::InvalidSpec(format!(
                "polynomial term on `{name}` needs degree >= 1"
            ))),
            Term::TruncatedPower { degree, knots, .. } => {
                if *degree == 0 {
                    return Err(Error::InvalidSpec(format!(
                        "truncated power term on `{name}` needs degree >= 1"
                    )));
                }
                if knots.is_empty() {
                    return Err(Error::InvalidSpec(format!(
                        "truncated power term on `{name}` has no knots"
                    )));
                }
                if knots.iter().any(|t| !t.is_finite()) {
                    return Err(Error::NonFinite(format!("knots of `{name}`")));
                }
                if knots.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSpec(format!(
                        "knots on `{name}` must be strictly increasing"
                    )));
                }
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if let Some(t) = knots.iter().find(|&&t| t < lo || t > hi) {
                    return Err(Error::InvalidSpec(format!(
                        "knot {t} lies outside the observed range [{lo}, {hi}] of `{name}`"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Appends this term's columns (and their labels) to the output buffers.
    pub(crate) fn expand(
        &self,
        data: &Dataset,
        columns: &mut Vec<Vec<f64>>,
        labels: &mut Vec<String>,
    ) -> Result<()> {
        match self {
            Term::Intercept => {
                columns.push(vec![1.0; data.n_rows()]);
                labels.push("intercept".into());
            }
            Term::Raw { column } => {
                columns.push(data.column(column)?.to_vec());
                labels.push(column.clone());
            }
            Term::Polynomial { column, degree } => {
                let x = data.column(column)?;
                for p in 1..=*degree {
                    columns.push(x.iter().map(|v| v.powi(p as i32)).collect());
                    labels.push(if p == 1 {
                        column.clone()
                    } else {
                        format!("{column}^{p}")
                    });
                }
            }
            Term::TruncatedPower {
                column,
                degree,
                knots,
            } => {
                let x = data.column(column)?;
                for &t in knots {
                    columns.push(
                        x.iter()
                            .map(|v| (v - t).max(0.0).powi(*degree as i32))
                            .collect(),
                    );
                    labels.push(format!("({column}-{t})_+^{degree}"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Intercept => write!(f, "intercept"),
            Term::Raw { column } => write!(f, "{column}"),
            Term::Polynomial { column, degree } => write!(f, "poly({column}, {degree})"),
            Term::TruncatedPower {
                column,
                degree,
                knots,
            } => {
                let knots: Vec<String> = knots.iter().map(|k| k.to_string()).collect();
                write!(f, "tpow({column}, {degree}, [{}])", knots.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub label: String,
    pub response: String,
    pub terms: Vec<Term>,
}

impl ModelSpec {
    pub fn new(label: impl Into<String>, response: impl Into<String>, terms: Vec<Term>) -> Self {
        Self {
            label: label.into(),
            response: response.into(),
            terms,
        }
    }

    /// Number of design columns after expansion.
    pub fn width(&self) -> usize {
        self.terms.iter().map(Term::width).sum()
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "model `{}` has no terms",
                self.label
            )));
        }
        data.column(&self.response)?;
        self.terms.iter().try_for_each(|t| t.validate(data))
    }
}
