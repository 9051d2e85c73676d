//! The parsimonious uniform coefficient prior.
//!
//! With `‖e‖ ≤ max‖e‖`, the map `e ↦ β̂ − (XᵀX)⁻¹Xᵀe` confines `β` to an
//! `m`-ellipsoid centered on `β̂` with volume
//! `π^{m/2}/Γ((m+2)/2) · max‖e‖^m / |XᵀX|^{1/2}`. The prior is uniform with
//! height equal to the inverse of that volume. Everything is kept in log scale.

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::error_norm::{max_error_norm, BoundMode, NoiseModel, DEFAULT_K};
use crate::ols::FitResult;
use crate::special::{ln_gamma, ln_pi};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SigmaMode {
    Known { sigma: f64 },
    /// Jeffreys prior `A/σ` on the noise spread.
    Jeffreys { a: f64 },
}

impl SigmaMode {
    pub fn name(&self) -> &'static str {
        match self {
            SigmaMode::Known { .. } => "known",
            SigmaMode::Jeffreys { .. } => "jeffreys",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub k: f64,
    pub bound_mode: BoundMode,
    pub sigma_mode: SigmaMode,
}

impl PriorSpec {
    /// Known σ, `k = 6`, exact bound.
    pub fn known(sigma: f64) -> Self {
        Self {
            k: DEFAULT_K,
            bound_mode: BoundMode::Exact,
            sigma_mode: SigmaMode::Known { sigma },
        }
    }

    /// Jeffreys σ with `A = 1`, `k = 6`, approximate bound.
    pub fn jeffreys() -> Self {
        Self {
            k: DEFAULT_K,
            bound_mode: BoundMode::Approximate,
            sigma_mode: SigmaMode::Jeffreys { a: 1.0 },
        }
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_bound_mode(mut self, mode: BoundMode) -> Self {
        self.bound_mode = mode;
        self
    }

    pub fn with_jeffreys_a(mut self, a: f64) -> Self {
        self.sigma_mode = SigmaMode::Jeffreys { a };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k must be finite and >= 0, got {}",
                self.k
            )));
        }
        match self.sigma_mode {
            SigmaMode::Known { sigma } if !(sigma.is_finite() && sigma > 0.0) => {
                Err(Error::NonPositiveSigma(sigma))
            }
            SigmaMode::Jeffreys { a } if !(a.is_finite() && a > 0.0) => Err(
                Error::InvalidParameter(format!("Jeffreys constant A must be > 0, got {a}")),
            ),
            _ => Ok(()),
        }
    }

    /// σ when the mode is `Known`.
    pub fn known_sigma(&self) -> Result<f64> {
        match self.sigma_mode {
            SigmaMode::Known { sigma } => Ok(sigma),
            SigmaMode::Jeffreys { .. } => Err(Error::SigmaModeMismatch { expected: "known" }),
        }
    }

    /// `A` when the mode is `Jeffreys`.
    pub fn jeffreys_a(&self) -> Result<f64> {
        match self.sigma_mode {
            SigmaMode::Jeffreys { a } => Ok(a),
            SigmaMode::Known { .. } => Err(Error::SigmaModeMismatch {
                expected: "jeffreys",
            }),
        }
    }
}

/// Uniform density over the coefficient ellipsoid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorDensity {
    pub log_height: f64,
    pub log_volume: f64,
    pub center: Vec<f64>,
    pub m: usize,
}

/// `ln V` of the ellipsoid. `m = 0` is the trivial point space with volume 1.
pub fn ellipsoid_log_volume(m: usize, max_e: f64, gram_logdet: f64) -> Result<f64> {
    if !(max_e > 0.0 && max_e.is_finite()) {
        return Err(Error::NonPositiveBound(max_e));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let m_f = m as f64;
    Ok(0.5 * m_f * ln_pi() - ln_gamma(0.5 * m_f + 1.0) + m_f * max_e.ln() - 0.5 * gram_logdet)
}

pub fn prior_log_height(m: usize, max_e: f64, gram_logdet: f64) -> Result<f64> {
    ellipsoid_log_volume(m, max_e, gram_logdet).map(|v| -v)
}

/// Builds the σ-conditional prior centered on `β̂`.
pub fn parsimonious_prior(
    fit: &FitResult,
    x: &DesignMatrix,
    spec: &PriorSpec,
) -> Result<PriorDensity> {
    spec.validate()?;
    let nm = NoiseModel::new(spec.known_sigma()?, fit.n)?;
    let bound = max_error_norm(&nm, spec.k, spec.bound_mode)?;
    let log_volume = ellipsoid_log_volume(x.ncols(), bound.value, x.gram_logdet())?;
    Ok(PriorDensity {
        log_height: -log_volume,
        log_volume,
        center: fit.beta_hat.clone(),
        m: x.ncols(),
    })
}

/// Interval `β̂ ± max‖e‖/‖x‖` for a single-coefficient model.
pub fn scalar_beta_bounds(fit: &FitResult, x_norm: f64, max_e: f64) -> Result<(f64, f64)> {
    if fit.m != 1 {
        return Err(Error::NotUnivariate { m: fit.m });
    }
    if max_e.is_nan() || max_e < 0.0 {
        return Err(Error::NonPositiveBound(max_e));
    }
    if !(x_norm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "predictor norm must be > 0, got {x_norm}"
        )));
    }
    let half = max_e / x_norm;
    let b = fit.beta_hat[0];
    Ok((b - half, b + half))
}
