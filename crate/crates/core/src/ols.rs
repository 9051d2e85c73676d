//! Least-squares fit and the residual/coefficient split of `‖y − Xβ‖²`.

use nalgebra::DVector;
use serde::Serialize;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};

/// Sufficient statistics of a least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub residual_norm: f64,
    pub n: usize,
    pub m: usize,
}

impl FitResult {
    pub fn beta_hat_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.beta_hat)
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Solves the normal equations through the Cholesky factor of `XᵀX`.
pub fn fit(x: &DesignMatrix, y: &[f64]) -> Result<FitResult> {
    check_len("response length", x.nrows(), y.len())?;
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("response row {}", i + 1)));
    }
    let y = DVector::from_column_slice(y);
    let beta = x.solve_gram(&x.matrix().tr_mul(&y));
    let y_hat = x.matrix() * &beta;
    let residual_norm = (&y - &y_hat).norm();
    Ok(FitResult {
        beta_hat: beta.iter().copied().collect(),
        y_hat: y_hat.iter().copied().collect(),
        residual_norm,
        n: x.nrows(),
        m: x.ncols(),
    })
}

/// `‖y − Xβ‖² = residual_part + coefficient_part`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSplit {
    /// `‖y − ŷ‖²`
    pub residual_part: f64,
    /// `(β − β̂)ᵀ XᵀX (β − β̂)`
    pub coefficient_part: f64,
}

impl QuadraticSplit {
    pub fn total(&self) -> f64 {
        self.residual_part + self.coefficient_part
    }
}

pub fn decompose_quadratic(x: &DesignMatrix, y: &[f64], beta: &[f64]) -> Result<QuadraticSplit> {
    check_len("coefficient length", x.ncols(), beta.len())?;
    let f = fit(x, y)?;
    Ok(split_with_fit(x, &f, beta))
}

/// Same split when the fit is already known. `beta` must have length `m`.
pub(crate) fn split_with_fit(x: &DesignMatrix, fit: &FitResult, beta: &[f64]) -> QuadraticSplit {
    let d = DVector::from_iterator(
        beta.len(),
        beta.iter().zip(&fit.beta_hat).map(|(b, bh)| b - bh),
    );
    QuadraticSplit {
        residual_part: fit.residual_norm * fit.residual_norm,
        coefficient_part: x.gram_quadratic(&d),
    }
}
