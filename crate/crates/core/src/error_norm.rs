//! Distribution of the error-vector length `‖e‖` for `e ~ MN(0, σ²I)`.
//!
//! `‖e‖/σ` is chi distributed with `N` degrees of freedom. The k-sigma bound
//! `max‖e‖ = E‖e‖ + k·sd‖e‖` drives the size of the coefficient prior.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_gamma_ratio};

/// Default sigma multiplier for the error-norm bound.
pub const DEFAULT_K: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    n: usize,
}

impl NoiseModel {
    pub fn new(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::NonPositiveSigma(sigma));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be >= 1".into()));
        }
        Ok(Self { sigma, n })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// Gamma-function mean and variance.
    #[default]
    Exact,
    /// Large-N plug-ins: mean `√(N−1)·σ`, variance `σ²`.
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBound {
    pub k: f64,
    pub mode: BoundMode,
    pub value: f64,
}

/// Density of `‖e‖` at radius `r`.
pub fn error_norm_pdf(r: f64, nm: &NoiseModel) -> Result<f64> {
    error_norm_log_pdf(r, nm).map(f64::exp)
}

pub fn error_norm_log_pdf(r: f64, nm: &NoiseModel) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::NegativeRadius(r));
    }
    let n = nm.n as f64;
    let two_var = 2.0 * nm.sigma * nm.sigma;
    let radial = if nm.n == 1 {
        0.0
    } else if r == 0.0 {
        return Ok(f64::NEG_INFINITY);
    } else {
        (n - 1.0) * r.ln()
    };
    Ok(LN_2 + radial - r * r / two_var - 0.5 * n * two_var.ln() - ln_gamma(0.5 * n))
}

/// `E‖e‖^r = 2^{r/2} Γ((N+r)/2)/Γ(N/2) σ^r`.
pub fn error_norm_moment(order: u32, nm: &NoiseModel) -> f64 {
    let r = order as f64;
    let log = 0.5 * r * LN_2 + ln_gamma_ratio(0.5 * nm.n as f64, 0.5 * r) + r * nm.sigma.ln();
    log.exp()
}

/// Ratio `√2 Γ((N+1)/2)/Γ(N/2)`, the mean of the unit-σ chi distribution.
fn chi_mean(n: usize) -> f64 {
    (0.5 * LN_2 + ln_gamma_ratio(0.5 * n as f64, 0.5)).exp()
}

/// Mean and variance of `‖e‖`.
pub fn error_norm_mean_var(nm: &NoiseModel, mode: BoundMode) -> Result<(f64, f64)> {
    let s = nm.sigma;
    match mode {
        BoundMode::Exact => {
            let c = chi_mean(nm.n);
            Ok((c * s, (nm.n as f64 - c * c) * s * s))
        }
        BoundMode::Approximate => {
            if nm.n < 2 {
                return Err(Error::ApproximationInvalid { n: nm.n });
            }
            Ok(((nm.n as f64 - 1.0).sqrt() * s, s * s))
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sigma multiplier k must be finite and >= 0, got {k}"
        )))
    }
}

/// `max‖e‖ = mean + k·sd` under the chosen mode.
pub fn max_error_norm(nm: &NoiseModel, k: f64, mode: BoundMode) -> Result<ErrorBound> {
    check_k(k)?;
    let value = match mode {
        // Written as a single product so the value is exactly (√(N−1) + k)·σ.
        BoundMode::Approximate => {
            if nm.n < 2 {
                return Err(Error::ApproximationInvalid { n: nm.n });
            }
            ((nm.n as f64 - 1.0).sqrt() + k) * nm.sigma
        }
        BoundMode::Exact => {
            let (mean, var) = error_norm_mean_var(nm, mode)?;
            mean + k * var.max(0.0).sqrt()
        }
    };
    if !(value > 0.0) {
        return Err(Error::NonPositiveBound(value));
    }
    Ok(ErrorBound { k, mode, value })
}

/// The bound divided by σ: `√(N−1) + k` in approximate mode.
pub fn unit_bound(n: usize, k: f64, mode: BoundMode) -> Result<f64> {
    let nm = NoiseModel::new(1.0, n)?;
    max_error_norm(&nm, k, mode).map(|b| b.value)
}
