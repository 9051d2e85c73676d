//! Log-evidence for known and unknown σ, and posterior model probabilities.
//!
//! Both evidences factor as `occam · goodness-of-fit · common`:
//!
//! | σ mode   | `ln occam`                                   | `ln gof`      | `ln common`                      |
//! |----------|----------------------------------------------|---------------|----------------------------------|
//! | known    | `(m/2)ln2 + lnΓ((m+2)/2) − m ln(max‖e‖/σ)`   | `−‖y−ŷ‖²/2σ²` | `−(N/2) ln(2πσ²)`                |
//! | Jeffreys | `(m/2)ln2 + lnΓ((m+2)/2) − m ln(√(N−1)+k)`   | `−N ln‖y−ŷ‖`  | `ln A + lnΓ(N/2) − ln2 − (N/2)lnπ` |
//!
//! The common factor is shared by every model fitted to the same response,
//! so rankings are computed from `ln occam + ln gof` alone.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::error_norm::{unit_bound, BoundMode};
use crate::ols::FitResult;
use crate::prior::{PriorSpec, SigmaMode};
use crate::special::{ln_gamma, ln_pi, log_sum_exp};

/// Residuals this small relative to `‖ŷ‖` are treated as exact interpolation.
pub const PERFECT_FIT_RELATIVE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceReport {
    pub log_evidence: f64,
    pub log_occam: f64,
    pub log_gof: f64,
    pub log_common: f64,
    pub sigma_mode: SigmaMode,
    pub bound_mode: BoundMode,
    pub n: usize,
    pub m: usize,
    pub k: f64,
    pub residual_norm: f64,
}

impl EvidenceReport {
    /// `ln occam + ln gof`: the part of the evidence that differs between models.
    pub fn log_relative_evidence(&self) -> f64 {
        self.log_occam + self.log_gof
    }
}

fn occam_with_unit_bound(m: usize, unit_bound: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let m = m as f64;
    0.5 * m * LN_2 + ln_gamma(0.5 * m + 1.0) - m * unit_bound.ln()
}

/// `ln[2^{m/2} Γ((m+2)/2) / (√(N−1)+k)^m]`.
pub fn log_occam_factor(n: usize, m: usize, k: f64) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    Ok(occam_with_unit_bound(m, unit_bound(n, k, BoundMode::Approximate)?))
}

/// `−N ln‖y−ŷ‖`.
pub fn log_goodness_of_fit(residual_norm: f64, n: usize) -> Result<f64> {
    if residual_norm.is_nan() || residual_norm <= 0.0 {
        return Err(Error::PerfectFit);
    }
    Ok(-(n as f64) * residual_norm.ln())
}

/// `ln[A Γ(N/2) / (2 π^{N/2})]`.
pub fn log_common_factor(n: usize, a: f64) -> f64 {
    let n = n as f64;
    a.ln() + ln_gamma(0.5 * n) - LN_2 - 0.5 * n * ln_pi()
}

fn check_fit(fit: &FitResult, x: &DesignMatrix) -> Result<()> {
    if fit.m != x.ncols() || fit.n != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "fit vs design columns",
            expected: x.ncols(),
            found: fit.m,
        });
    }
    if !(fit.residual_norm >= 0.0 && fit.residual_norm.is_finite()) {
        return Err(Error::NonFinite("residual norm".into()));
    }
    Ok(())
}

/// True when the model reproduces the response up to rounding.
pub fn is_perfect_fit(fit: &FitResult) -> bool {
    let fitted = fit.y_hat.iter().map(|v| v * v).sum::<f64>().sqrt();
    fit.m >= fit.n || fit.residual_norm <= PERFECT_FIT_RELATIVE * fitted
}

/// Evidence with σ fixed, using the exact or approximate error-norm bound.
pub fn log_evidence_known_sigma(
    fit: &FitResult,
    x: &DesignMatrix,
    spec: &PriorSpec,
) -> Result<EvidenceReport> {
    spec.validate()?;
    check_fit(fit, x)?;
    let sigma = spec.known_sigma()?;
    let n = fit.n as f64;
    let log_occam = if fit.m == 0 {
        0.0
    } else {
        occam_with_unit_bound(fit.m, unit_bound(fit.n, spec.k, spec.bound_mode)?)
    };
    let var = sigma * sigma;
    let log_gof = -fit.residual_norm * fit.residual_norm / (2.0 * var);
    let log_common = -0.5 * n * (2.0 * PI * var).ln();
    Ok(EvidenceReport {
        log_evidence: log_occam + log_gof + log_common,
        log_occam,
        log_gof,
        log_common,
        sigma_mode: spec.sigma_mode,
        bound_mode: spec.bound_mode,
        n: fit.n,
        m: fit.m,
        k: spec.k,
        residual_norm: fit.residual_norm,
    })
}

/// Evidence with σ integrated out under the Jeffreys prior.
pub fn log_evidence_unknown_sigma(
    fit: &FitResult,
    x: &DesignMatrix,
    spec: &PriorSpec,
) -> Result<EvidenceReport> {
    spec.validate()?;
    check_fit(fit, x)?;
    let a = spec.jeffreys_a()?;
    if spec.bound_mode != BoundMode::Approximate {
        return Err(Error::ExactBoundUnsupported);
    }
    if fit.n < 2 {
        return Err(Error::ApproximationInvalid { n: fit.n });
    }
    if is_perfect_fit(fit) {
        return Err(Error::PerfectFit);
    }
    let log_occam = log_occam_factor(fit.n, fit.m, spec.k)?;
    let log_gof = log_goodness_of_fit(fit.residual_norm, fit.n)?;
    let log_common = log_common_factor(fit.n, a);
    Ok(EvidenceReport {
        log_evidence: log_occam + log_gof + log_common,
        log_occam,
        log_gof,
        log_common,
        sigma_mode: spec.sigma_mode,
        bound_mode: spec.bound_mode,
        n: fit.n,
        m: fit.m,
        k: spec.k,
        residual_norm: fit.residual_norm,
    })
}

/// Dispatches on the prior's σ mode.
pub fn log_evidence(fit: &FitResult, x: &DesignMatrix, spec: &PriorSpec) -> Result<EvidenceReport> {
    match spec.sigma_mode {
        SigmaMode::Known { .. } => log_evidence_known_sigma(fit, x, spec),
        SigmaMode::Jeffreys { .. } => log_evidence_unknown_sigma(fit, x, spec),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedModel {
    pub label: String,
    pub log_evidence: f64,
    pub posterior_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRanking {
    /// Sorted by probability (descending), then label.
    pub entries: Vec<RankedModel>,
    pub prior_probs: Option<Vec<f64>>,
}

impl ModelRanking {
    pub fn get(&self, label: &str) -> Option<&RankedModel> {
        self.entries.iter().find(|e| e.label == label)
    }
}

fn validate_priors(priors: &[f64], count: usize) -> Result<()> {
    if priors.len() != count {
        return Err(Error::InvalidPriors(format!(
            "{} priors for {count} models",
            priors.len()
        )));
    }
    if priors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidPriors("priors must be finite and >= 0".into()));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidPriors(format!("priors sum to {total}, not 1")));
    }
    Ok(())
}

/// Normalizes `weights` (log scale) and pairs them with labels and the
/// log-evidences shown in the output.
fn normalize(
    labels: Vec<String>,
    shown: Vec<f64>,
    weights: &[f64],
    priors: Option<&[f64]>,
) -> Result<ModelRanking> {
    if labels.is_empty() {
        return Err(Error::EmptyModelSet);
    }
    if weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
        return Err(Error::NonFinite("log-evidence".into()));
    }
    let log_post: Vec<f64> = match priors {
        Some(p) => {
            validate_priors(p, labels.len())?;
            weights.iter().zip(p).map(|(w, p)| w + p.ln()).collect()
        }
        None => weights.to_vec(),
    };
    let lse = log_sum_exp(&log_post);
    if !lse.is_finite() {
        return Err(Error::InvalidPriors("every model has zero weight".into()));
    }
    let raw: Vec<f64> = log_post.iter().map(|w| (w - lse).exp()).collect();
    let total: f64 = raw.iter().sum();
    let mut entries: Vec<RankedModel> = labels
        .into_iter()
        .zip(shown)
        .zip(raw)
        .map(|((label, log_evidence), p)| RankedModel {
            label,
            log_evidence,
            posterior_prob: p / total,
        })
        .collect();
    entries.sort_by(|a, b| match b.posterior_prob.total_cmp(&a.posterior_prob) {
        Ordering::Equal => a.label.cmp(&b.label),
        o => o,
    });
    Ok(ModelRanking {
        entries,
        prior_probs: priors.map(<[f64]>::to_vec),
    })
}

/// Posterior model probabilities from log-evidences; equal priors when `priors` is `None`.
pub fn model_posterior_probs(
    evidences: &[(String, f64)],
    priors: Option<&[f64]>,
) -> Result<ModelRanking> {
    let labels = evidences.iter().map(|(l, _)| l.clone()).collect();
    let values: Vec<f64> = evidences.iter().map(|(_, v)| *v).collect();
    normalize(labels, values.clone(), &values, priors)
}

/// Ranks evidence reports computed against the same response.
///
/// The shared common factor never enters the normalization, so the
/// probabilities do not depend on `A` (or on σ's normalizing constant) at all.
pub fn rank_reports(
    reports: &[(String, EvidenceReport)],
    priors: Option<&[f64]>,
) -> Result<ModelRanking> {
    let Some((_, first)) = reports.first() else {
        return Err(Error::EmptyModelSet);
    };
    for (label, r) in reports {
        if r.n != first.n || r.sigma_mode != first.sigma_mode {
            return Err(Error::InvalidParameter(format!(
                "report `{label}` does not share N and sigma mode with the rest"
            )));
        }
    }
    let labels = reports.iter().map(|(l, _)| l.clone()).collect();
    let shown = reports.iter().map(|(_, r)| r.log_evidence).collect();
    let weights: Vec<f64> = reports.iter().map(|(_, r)| r.log_relative_evidence()).collect();
    normalize(labels, shown, &weights, priors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ols::fit;
    use crate::prior::{parsimonious_prior, PriorSpec};
    use nalgebra::DMatrix;

    fn fake_fit(n: usize, m: usize, r: f64) -> (FitResult, DesignMatrix) {
        let x = DesignMatrix::from_matrix(DMatrix::from_fn(n, m, |i, j| if i == j { 1.0 } else { 0.0 }))
            .unwrap();
        let f = FitResult {
            beta_hat: vec![0.0; m],
            y_hat: vec![0.0; n],
            residual_norm: r,
            n,
            m,
        };
        (f, x)
    }

    #[test]
    fn occam_values() {
        assert_eq!(log_occam_factor(50, 0, 6.0).unwrap(), 0.0);
        let v = log_occam_factor(101, 1, 6.0).unwrap();
        assert!((v - ((PI / 2.0).sqrt() / 16.0).ln()).abs() < 1e-14);
        assert!((v + 2.546_797_369_595_054).abs() < 1e-12);
        let scan: Vec<f64> = (0..=200).map(|m| log_occam_factor(101, m, 6.0).unwrap()).collect();
        assert!(scan.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn goodness_of_fit_values() {
        assert_eq!(log_goodness_of_fit(1.0, 7).unwrap(), 0.0);
        assert!((log_goodness_of_fit(std::f64::consts::E, 10).unwrap() + 10.0).abs() < 1e-14);
        let a = log_goodness_of_fit(0.8, 12).unwrap();
        let b = log_goodness_of_fit(0.4, 12).unwrap();
        assert!((b - a - 12.0 * LN_2).abs() < 1e-13);
        assert_eq!(log_goodness_of_fit(0.0, 3), Err(Error::PerfectFit));
    }

    #[test]
    fn unknown_sigma_reference_case() {
        let (f, x) = fake_fit(2, 1, 1.0);
        let spec = PriorSpec::jeffreys().with_k(1.0);
        let r = log_evidence_unknown_sigma(&f, &x, &spec).unwrap();
        let want = 0.5 * LN_2 + ln_gamma(1.5) - LN_2 - LN_2 - PI.ln();
        assert!((r.log_evidence - want).abs() < 1e-14);
        assert!((r.log_evidence + 2.305_232_894_324_563).abs() < 1e-12);
        assert_eq!(r.log_evidence, r.log_occam + r.log_gof + r.log_common);
    }

    #[test]
    fn unknown_sigma_errors() {
        let (f, x) = fake_fit(4, 1, 0.0);
        assert_eq!(
            log_evidence_unknown_sigma(&f, &x, &PriorSpec::jeffreys()),
            Err(Error::PerfectFit)
        );
        let (f, x) = fake_fit(4, 1, 1.0);
        assert_eq!(
            log_evidence_unknown_sigma(&f, &x, &PriorSpec::jeffreys().with_bound_mode(BoundMode::Exact)),
            Err(Error::ExactBoundUnsupported)
        );
        assert!(matches!(
            log_evidence_unknown_sigma(&f, &x, &PriorSpec::known(1.0)),
            Err(Error::SigmaModeMismatch { .. })
        ));
    }

    #[test]
    fn jeffreys_constant_shifts_log_evidence() {
        let (f, x) = fake_fit(9, 2, 1.3);
        let base = log_evidence_unknown_sigma(&f, &x, &PriorSpec::jeffreys()).unwrap();
        let scaled =
            log_evidence_unknown_sigma(&f, &x, &PriorSpec::jeffreys().with_jeffreys_a(5.0)).unwrap();
        assert!((scaled.log_evidence - base.log_evidence - 5f64.ln()).abs() < 1e-13);
        assert_eq!(scaled.log_relative_evidence(), base.log_relative_evidence());
    }

    #[test]
    fn empty_model_known_sigma_is_pure_likelihood() {
        let (f, x) = fake_fit(6, 0, 2.0);
        let r = log_evidence_known_sigma(&f, &x, &PriorSpec::known(1.5)).unwrap();
        let want = -3.0 * (2.0 * PI * 2.25).ln() - 4.0 / (2.0 * 2.25);
        assert!((r.log_evidence - want).abs() < 1e-13);
        assert_eq!(r.log_occam, 0.0);
    }

    #[test]
    fn known_sigma_equals_prior_height_plus_integrated_likelihood() {
        let x = DesignMatrix::from_matrix(DMatrix::from_fn(7, 2, |i, j| ((i * 3 + j * 5) % 7) as f64 - 2.5))
            .unwrap();
        let y: Vec<f64> = (0..7).map(|i| (i as f64).cos()).collect();
        let f = fit(&x, &y).unwrap();
        for mode in [BoundMode::Exact, BoundMode::Approximate] {
            let spec = PriorSpec::known(0.7).with_bound_mode(mode).with_k(2.5);
            let r = log_evidence_known_sigma(&f, &x, &spec).unwrap();
            let prior = parsimonious_prior(&f, &x, &spec).unwrap();
            let var = 0.49;
            let eq19 = -0.5 * x.gram_logdet()
                - 0.5 * (7.0 - 2.0) * (2.0 * PI * var).ln()
                - f.residual_norm.powi(2) / (2.0 * var);
            assert!((r.log_evidence - (prior.log_height + eq19)).abs() < 1e-12);
        }
    }

    #[test]
    fn larger_residual_lowers_known_sigma_evidence() {
        let (f1, x) = fake_fit(5, 1, 1.0);
        let f2 = FitResult { residual_norm: 2.0, ..f1.clone() };
        let spec = PriorSpec::known(1.0);
        let a = log_evidence_known_sigma(&f1, &x, &spec).unwrap().log_evidence;
        let b = log_evidence_known_sigma(&f2, &x, &spec).unwrap().log_evidence;
        assert!(b < a);
    }

    #[test]
    fn posterior_probs_basic() {
        let ev = vec![("a".to_string(), 2f64.ln()), ("b".to_string(), 0.0)];
        let r = model_posterior_probs(&ev, None).unwrap();
        assert_eq!(r.entries[0].label, "a");
        assert!((r.entries[0].posterior_prob - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.entries[1].posterior_prob - 1.0 / 3.0).abs() < 1e-15);

        let single = model_posterior_probs(&[("only".to_string(), -1234.5)], None).unwrap();
        assert_eq!(single.entries[0].posterior_prob, 1.0);

        let shifted: Vec<(String, f64)> = ev.iter().map(|(l, v)| (l.clone(), v + 1000.0)).collect();
        let s = model_posterior_probs(&shifted, None).unwrap();
        for (e1, e2) in r.entries.iter().zip(&s.entries) {
            assert!((e1.posterior_prob - e2.posterior_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_probs_with_priors_and_ties() {
        let ev = vec![
            ("b".to_string(), 0.0),
            ("a".to_string(), 0.0),
            ("c".to_string(), 0.0),
        ];
        let r = model_posterior_probs(&ev, None).unwrap();
        let order: Vec<&str> = r.entries.iter().map(|e| e.label.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);

        let r = model_posterior_probs(&ev, Some(&[0.5, 0.25, 0.25])).unwrap();
        assert_eq!(r.entries[0].label, "b");
        assert!((r.get("b").unwrap().posterior_prob - 0.5).abs() < 1e-15);

        assert!(matches!(
            model_posterior_probs(&ev, Some(&[0.5, 0.5, 0.5])),
            Err(Error::InvalidPriors(_))
        ));
        assert!(matches!(
            model_posterior_probs(&ev, Some(&[1.0, 0.0])),
            Err(Error::InvalidPriors(_))
        ));
        assert_eq!(model_posterior_probs(&[], None), Err(Error::EmptyModelSet));
    }
}
