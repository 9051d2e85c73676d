//! Coefficient posteriors.
//!
//! Known σ gives a multivariate normal centered on `β̂` with precision
//! `XᵀX/σ²`; the prior height cancels and does not appear here. Integrating σ
//! out of the joint posterior under the Jeffreys prior gives a multivariate
//! Student-t with scale set by `‖y − ŷ‖` and `XᵀX`.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::error_norm::NoiseModel;
use crate::ols::FitResult;
use crate::special::{ln_gamma, ln_gamma_ratio, ln_pi};

fn offset(center: &[f64], beta: &[f64]) -> Result<DVector<f64>> {
    if beta.len() != center.len() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: center.len(),
            found: beta.len(),
        });
    }
    Ok(DVector::from_iterator(
        beta.len(),
        beta.iter().zip(center).map(|(b, c)| b - c),
    ))
}

fn quad(gram: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    d.dot(&(gram * d)).max(0.0)
}

fn check_fit(fit: &FitResult, x: &DesignMatrix) -> Result<()> {
    if fit.m != x.ncols() {
        return Err(Error::DimensionMismatch {
            what: "fit vs design columns",
            expected: x.ncols(),
            found: fit.m,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalPosterior {
    pub mean: Vec<f64>,
    pub sigma: f64,
    #[serde(skip)]
    pub gram: DMatrix<f64>,
    pub gram_logdet: f64,
}

impl NormalPosterior {
    pub fn m(&self) -> usize {
        self.mean.len()
    }

    /// `ln |XᵀX/σ²|`
    pub fn precision_logdet(&self) -> f64 {
        self.gram_logdet - self.m() as f64 * (self.sigma * self.sigma).ln()
    }

    pub fn log_density(&self, beta: &[f64]) -> Result<f64> {
        let d = offset(&self.mean, beta)?;
        let var = self.sigma * self.sigma;
        Ok(0.5 * self.gram_logdet
            - 0.5 * self.m() as f64 * (2.0 * PI * var).ln()
            - quad(&self.gram, &d) / (2.0 * var))
    }

    pub fn density(&self, beta: &[f64]) -> Result<f64> {
        self.log_density(beta).map(f64::exp)
    }
}

pub fn posterior_known_sigma(
    fit: &FitResult,
    x: &DesignMatrix,
    nm: &NoiseModel,
) -> Result<NormalPosterior> {
    check_fit(fit, x)?;
    Ok(NormalPosterior {
        mean: fit.beta_hat.clone(),
        sigma: nm.sigma(),
        gram: x.gram().clone(),
        gram_logdet: x.gram_logdet(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentTPosterior {
    pub center: Vec<f64>,
    #[serde(skip)]
    pub scale_gram: DMatrix<f64>,
    pub gram_logdet: f64,
    pub residual_norm: f64,
    pub n: usize,
    pub m: usize,
}

impl StudentTPosterior {
    pub fn log_density(&self, beta: &[f64]) -> Result<f64> {
        let d = offset(&self.center, beta)?;
        let r = self.residual_norm;
        let n = self.n as f64;
        let m = self.m as f64;
        // ‖r‖^N / (‖r‖² + q)^{(N+m)/2} = ‖r‖^{−m} (1 + q/‖r‖²)^{−(N+m)/2}
        let rel = quad(&self.scale_gram, &d) / (r * r);
        Ok(ln_gamma_ratio(0.5 * n, 0.5 * m) + 0.5 * self.gram_logdet
            - 0.5 * m * ln_pi()
            - m * r.ln()
            - 0.5 * (n + m) * rel.ln_1p())
    }

    pub fn density(&self, beta: &[f64]) -> Result<f64> {
        self.log_density(beta).map(f64::exp)
    }
}

pub fn posterior_unknown_sigma(fit: &FitResult, x: &DesignMatrix) -> Result<StudentTPosterior> {
    check_fit(fit, x)?;
    if !(fit.residual_norm > 0.0) {
        return Err(Error::PerfectFit);
    }
    Ok(StudentTPosterior {
        center: fit.beta_hat.clone(),
        scale_gram: x.gram().clone(),
        gram_logdet: x.gram_logdet(),
        residual_norm: fit.residual_norm,
        n: fit.n,
        m: fit.m,
    })
}

/// Density of the marginal (σ integrated out) coefficient posterior.
pub fn marginal_posterior_density(beta: &[f64], post: &StudentTPosterior) -> Result<f64> {
    post.density(beta)
}

/// Log of the joint `(σ, β)` posterior under the Jeffreys prior.
pub fn log_joint_posterior_unknown_sigma(
    beta: &[f64],
    sigma: f64,
    fit: &FitResult,
    x: &DesignMatrix,
) -> Result<f64> {
    check_fit(fit, x)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if !(fit.residual_norm > 0.0) {
        return Err(Error::PerfectFit);
    }
    let d = offset(&fit.beta_hat, beta)?;
    let n = fit.n as f64;
    let m = fit.m as f64;
    let r = fit.residual_norm;
    let var = sigma * sigma;
    let misfit = r * r + x.gram_quadratic(&d);
    Ok(n * r.ln() - sigma.ln() + LN_2 + 0.5 * n * ln_pi() - ln_gamma(0.5 * n)
        + 0.5 * x.gram_logdet()
        - 0.5 * (n + m) * (2.0 * PI * var).ln()
        - misfit / (2.0 * var))
}

/// `(β − β̂)ᵀXᵀX(β − β̂) / ‖y − ŷ‖²`.
pub fn credible_quadratic_level(post: &StudentTPosterior, beta: &[f64]) -> Result<f64> {
    if !(post.residual_norm > 0.0) {
        return Err(Error::PerfectFit);
    }
    let d = offset(&post.center, beta)?;
    Ok(quad(&post.scale_gram, &d) / (post.residual_norm * post.residual_norm))
}
