//! Numerical oracles that certify the closed-form results.
//!
//! Each check recomputes a quantity by brute force (Monte Carlo or adaptive
//! quadrature of the defining integral) and compares it with the analytic
//! value. The oracles evaluate likelihoods and integrands directly from `X`,
//! `y`, and the defining densities; they share nothing with the closed-form
//! evaluators beyond arithmetic, `ln Γ`, and the prior height that the
//! integral is taken against.

pub mod mc;
pub mod quadrature;

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::error_norm::{
    error_norm_mean_var, error_norm_moment, error_norm_pdf, max_error_norm, BoundMode, NoiseModel,
};
use crate::evidence::{log_evidence_known_sigma, log_evidence_unknown_sigma};
use crate::ols::{fit, FitResult};
use crate::posterior::{log_joint_posterior_unknown_sigma, posterior_unknown_sigma, StudentTPosterior};
use crate::prior::{ellipsoid_log_volume, parsimonious_prior, PriorSpec};
use crate::special::ln_gamma;

use self::mc::{chunked, rng_for, sample_error_norms, stream_key};
use self::quadrature::{integrate, integrate_2d};

/// Half-width of the σ integration window in `u = ln σ`.
pub const LOG_SIGMA_HALF_WIDTH: f64 = 30.0;
/// Standard-error multiple for Monte Carlo moment checks.
pub const MC_SE_MULTIPLE: f64 = 4.0;
/// Standard-error multiple for hit-or-miss volume checks.
pub const VOLUME_SE_MULTIPLE: f64 = 3.0;
/// Relative agreement required between quadrature and closed-form evidences and densities.
pub const QUAD_REL_AGREEMENT: f64 = 1e-6;
/// Absolute agreement required for density normalization.
pub const PDF_MASS_TOLERANCE: f64 = 1e-8;
/// Largest coefficient dimension integrated by quadrature.
pub const MAX_QUAD_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub rng_seed: u64,
    pub mc_samples: usize,
    pub quad_rel_tol: f64,
    /// Coefficient box half-width for known-σ evidence quadrature, in
    /// posterior standard deviations.
    pub box_half_width: f64,
    /// Replaces the standard-error criterion of Monte Carlo checks with a fixed absolute tolerance.
    pub mc_tolerance: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            rng_seed: 42,
            mc_samples: 1_000_000,
            quad_rel_tol: 1e-8,
            box_half_width: 12.0,
            mc_tolerance: None,
        }
    }
}

impl OracleConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_samples < 1000 {
            return Err(Error::InvalidParameter(format!(
                "mc_samples must be >= 1000, got {}",
                self.mc_samples
            )));
        }
        if !(self.quad_rel_tol > 0.0 && self.quad_rel_tol <= 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "quad_rel_tol must lie in (0, 1e-2], got {}",
                self.quad_rel_tol
            )));
        }
        if !(self.box_half_width > 0.0) {
            return Err(Error::InvalidParameter("box_half_width must be > 0".into()));
        }
        if let Some(t) = self.mc_tolerance {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter("mc_tolerance must be >= 0".into()));
            }
        }
        Ok(())
    }

    // Integrator tolerance: two orders tighter than the check's own tolerance.
    fn integrator_rel_tol(&self) -> f64 {
        self.quad_rel_tol * 1e-2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub check_name: String,
    pub analytic: f64,
    pub numeric: f64,
    pub tolerance: f64,
    pub standard_error: Option<f64>,
    pub pass: bool,
}

impl ValidationOutcome {
    fn new(name: impl Into<String>, analytic: f64, numeric: f64, tolerance: f64, se: Option<f64>) -> Self {
        let pass = (analytic - numeric).abs() <= tolerance;
        Self {
            check_name: name.into(),
            analytic,
            numeric,
            tolerance,
            standard_error: se,
            pass,
        }
    }

    /// Compares two logarithms; passes when the linear-scale values agree to `rel`.
    fn log_scale(name: impl Into<String>, log_analytic: f64, log_numeric: f64, rel: f64) -> Self {
        Self::new(name, log_analytic, log_numeric, rel.ln_1p(), None)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.check_name = name.into();
        self
    }
}

fn mc_outcome(name: String, analytic: f64, numeric: f64, se: f64, cfg: &OracleConfig) -> ValidationOutcome {
    let tol = cfg.mc_tolerance.unwrap_or(MC_SE_MULTIPLE * se);
    ValidationOutcome::new(name, analytic, numeric, tol, Some(se))
}

/// Empirical mean, variance, and raw moments `r = 1..4` of `‖e‖` against the closed forms.
pub fn mc_error_norm_moments(nm: &NoiseModel, cfg: &OracleConfig) -> Vec<ValidationOutcome> {
    let base = format!("error_norm.mc.n={}.sigma={}", nm.n(), nm.sigma());
    let key = stream_key(cfg.rng_seed, &base);
    let sums = sample_error_norms(key, nm.n(), nm.sigma(), cfg.mc_samples);
    let count = sums.count as f64;
    let (mean, var) = error_norm_mean_var(nm, BoundMode::Exact).expect("exact mode is total");

    let mut out = Vec::with_capacity(6);
    let emp_var = sums.variance();
    out.push(mc_outcome(
        format!("{base}.mean"),
        mean,
        sums.mean(),
        (emp_var / count).sqrt(),
        cfg,
    ));
    let var_se = ((sums.central4() - emp_var * emp_var).max(0.0) / count).sqrt();
    out.push(mc_outcome(format!("{base}.variance"), var, emp_var, var_se, cfg));
    for r in 1..=4usize {
        let emp = sums.raw_mean(r);
        let spread = (sums.raw_mean(2 * r) - emp * emp).max(0.0);
        out.push(mc_outcome(
            format!("{base}.moment{r}"),
            error_norm_moment(r as u32, nm),
            emp,
            (spread / count).sqrt(),
            cfg,
        ));
    }
    out
}

/// Mass of the `‖e‖` density over `[0, ∞)`.
pub fn quad_error_norm_normalization(nm: &NoiseModel, cfg: &OracleConfig) -> ValidationOutcome {
    let upper = ((nm.n() as f64).sqrt() + 40.0) * nm.sigma();
    let mass = integrate(
        |r| error_norm_pdf(r, nm).unwrap_or(f64::NAN),
        0.0,
        upper,
        PDF_MASS_TOLERANCE * 1e-3,
        cfg.integrator_rel_tol(),
    );
    ValidationOutcome::new(
        format!("error_norm.pdf_mass.n={}", nm.n()),
        1.0,
        mass.value,
        PDF_MASS_TOLERANCE,
        None,
    )
}

/// `Σ (y_i − (Xβ)_i)²` evaluated entry by entry.
fn direct_sum_of_squares(x: &DMatrix<f64>, y: &[f64], beta: &[f64]) -> f64 {
    (0..x.nrows())
        .map(|i| {
            let pred: f64 = (0..x.ncols()).map(|j| x[(i, j)] * beta[j]).sum();
            (y[i] - pred).powi(2)
        })
        .sum()
}

/// Integrates prior height × Gaussian likelihood over a coefficient box and
/// compares with the known-σ closed-form evidence.
pub fn quad_evidence_known_sigma(
    x: &DesignMatrix,
    y: &[f64],
    fit: &FitResult,
    spec: &PriorSpec,
    cfg: &OracleConfig,
) -> Result<ValidationOutcome> {
    let m = x.ncols();
    if m == 0 || m > MAX_QUAD_DIM {
        return Err(Error::DimensionTooLarge { m, max: MAX_QUAD_DIM });
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: x.nrows(),
            found: y.len(),
        });
    }
    let sigma = spec.known_sigma()?;
    let analytic = log_evidence_known_sigma(fit, x, spec)?.log_evidence;
    let height = parsimonious_prior(fit, x, spec)?.log_height;

    let n = x.nrows() as f64;
    let var = sigma * sigma;
    let bh = &fit.beta_hat;
    let s_min = direct_sum_of_squares(x.matrix(), y, bh);
    let cov = x.gram_inverse() * var;
    let half: Vec<f64> = (0..m).map(|j| cfg.box_half_width * cov[(j, j)].sqrt()).collect();
    let weight = |beta: &[f64]| (-(direct_sum_of_squares(x.matrix(), y, beta) - s_min) / (2.0 * var)).exp();

    let integral = if m == 1 {
        integrate(|b| weight(&[b]), bh[0] - half[0], bh[0] + half[0], 0.0, cfg.integrator_rel_tol())
    } else {
        integrate_2d(
            |b0, b1| weight(&[b0, b1]),
            (bh[0] - half[0], bh[0] + half[0]),
            (bh[1] - half[1], bh[1] + half[1]),
            0.0,
            cfg.integrator_rel_tol(),
        )
    };
    let numeric = integral.value.ln() + height - 0.5 * n * (2.0 * PI * var).ln() - s_min / (2.0 * var);
    Ok(ValidationOutcome::log_scale(
        format!("evidence.known_sigma.n={}.m={m}", x.nrows()),
        analytic,
        numeric,
        QUAD_REL_AGREEMENT,
    ))
}

/// Integrates the Jeffreys-weighted known-σ evidence over `u = ln σ` and
/// compares with the unknown-σ closed form.
pub fn quad_evidence_unknown_sigma(
    fit: &FitResult,
    x: &DesignMatrix,
    spec: &PriorSpec,
    cfg: &OracleConfig,
) -> Result<ValidationOutcome> {
    if !(fit.residual_norm > 0.0) {
        return Err(Error::PerfectFit);
    }
    let analytic = log_evidence_unknown_sigma(fit, x, spec)?.log_evidence;
    let a = spec.jeffreys_a()?;
    let n = fit.n as f64;
    let m = fit.m as f64;
    let r2 = fit.residual_norm * fit.residual_norm;
    // ln of σ-free prefactor: 2^{m/2} Γ((m+2)/2) (√(N−1)+k)^{−m} · A (2π)^{−N/2}
    let prefactor = 0.5 * m * LN_2 + ln_gamma(0.5 * m + 1.0) - m * ((n - 1.0).sqrt() + spec.k).ln()
        + a.ln()
        - 0.5 * n * (2.0 * PI).ln();
    // Integrand in u: σ · (1/σ^{N+1}) exp(−‖y−ŷ‖²/2σ²) = exp(−N u − ‖y−ŷ‖² e^{−2u}/2)
    let g = |u: f64| -n * u - 0.5 * r2 * (-2.0 * u).exp();
    let center = (fit.residual_norm / n.sqrt()).ln();
    let g0 = g(center);
    let integral = integrate(
        |u| (g(u) - g0).exp(),
        center - LOG_SIGMA_HALF_WIDTH,
        center + LOG_SIGMA_HALF_WIDTH,
        0.0,
        cfg.integrator_rel_tol(),
    );
    let numeric = prefactor + g0 + integral.value.ln();
    Ok(ValidationOutcome::log_scale(
        format!("evidence.unknown_sigma.n={}.m={}", fit.n, fit.m),
        analytic,
        numeric,
        QUAD_REL_AGREEMENT,
    ))
}

/// Mass of the single-coefficient Student-t posterior, integrated after the
/// substitution `β = β̂ + ‖y−ŷ‖ tan(u)/‖x‖`.
pub fn quad_student_t_normalization(post: &StudentTPosterior, cfg: &OracleConfig) -> Result<ValidationOutcome> {
    if post.m != 1 {
        return Err(Error::DimensionTooLarge { m: post.m, max: 1 });
    }
    let x_norm = post.scale_gram[(0, 0)].sqrt();
    let scale = post.residual_norm / x_norm;
    let center = post.center[0];
    let mass = integrate(
        |u| {
            let c = u.cos();
            post.density(&[center + scale * u.tan()]).unwrap_or(f64::NAN) * scale / (c * c)
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        0.0,
        cfg.integrator_rel_tol(),
    );
    Ok(ValidationOutcome::new(
        format!("posterior.student_t_mass.n={}", post.n),
        1.0,
        mass.value,
        QUAD_REL_AGREEMENT,
        None,
    ))
}

/// Integrates the joint `(σ, β)` posterior over σ at a fixed `β` and compares
/// with the Student-t marginal.
pub fn quad_marginalization(
    beta: &[f64],
    fit: &FitResult,
    x: &DesignMatrix,
    cfg: &OracleConfig,
) -> Result<ValidationOutcome> {
    let post = posterior_unknown_sigma(fit, x)?;
    let analytic = post.log_density(beta)?;
    let misfit = direct_misfit(fit, x, beta);
    let center = (misfit / (fit.n + fit.m) as f64).sqrt().ln();
    let h = |u: f64| -> f64 {
        log_joint_posterior_unknown_sigma(beta, u.exp(), fit, x).unwrap_or(f64::NAN) + u
    };
    let h0 = h(center);
    let integral = integrate(
        |u| (h(u) - h0).exp(),
        center - LOG_SIGMA_HALF_WIDTH,
        center + LOG_SIGMA_HALF_WIDTH,
        0.0,
        cfg.integrator_rel_tol(),
    );
    Ok(ValidationOutcome::log_scale(
        format!("posterior.marginalization.n={}.m={}", fit.n, fit.m),
        analytic,
        h0 + integral.value.ln(),
        QUAD_REL_AGREEMENT,
    ))
}

// ‖y − ŷ‖² + ‖X(β − β̂)‖², used only to center the σ window.
fn direct_misfit(fit: &FitResult, x: &DesignMatrix, beta: &[f64]) -> f64 {
    let d = DVector::from_iterator(beta.len(), beta.iter().zip(&fit.beta_hat).map(|(b, c)| b - c));
    fit.residual_norm.powi(2) + (x.matrix() * d).norm_squared()
}

/// Hit-or-miss volume of `{β : (β−β̂)ᵀXᵀX(β−β̂) ≤ max_e²}` against the closed form.
pub fn mc_ellipsoid_volume(x: &DesignMatrix, max_e: f64, cfg: &OracleConfig) -> Result<ValidationOutcome> {
    let m = x.ncols();
    let analytic = ellipsoid_log_volume(m, max_e, x.gram_logdet())?.exp();
    let inv = x.gram_inverse();
    let half: Vec<f64> = (0..m).map(|j| max_e * inv[(j, j)].sqrt()).collect();
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let gram = x.gram().clone();
    let limit = max_e * max_e;
    let name = format!("prior.ellipsoid_volume.m={m}");
    let hits = chunked(
        stream_key(cfg.rng_seed, &name),
        cfg.mc_samples,
        || 0usize,
        |rng, hits: &mut usize| {
            let d = DVector::from_iterator(m, half.iter().map(|h| rng.random_range(-*h..*h)));
            if d.dot(&(&gram * &d)) <= limit {
                *hits += 1;
            }
        },
        |t, p| *t += p,
    );
    let count = cfg.mc_samples as f64;
    let p = hits as f64 / count;
    let se = box_volume * (p * (1.0 - p) / count).sqrt();
    let tol = cfg.mc_tolerance.unwrap_or(VOLUME_SE_MULTIPLE * se);
    Ok(ValidationOutcome::new(name, analytic, box_volume * p, tol, Some(se)))
}

/// A random regression problem: uniform predictors, uniform true
/// coefficients, Gaussian noise of spread `sigma`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, sigma: f64) -> (DesignMatrix, Vec<f64>) {
    loop {
        let x = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.5..1.5));
        let beta: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let noise: f64 = rng.sample(StandardNormal);
                (0..m).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + sigma * noise
            })
            .collect();
        if let Ok(dm) = DesignMatrix::from_matrix(x) {
            return (dm, y);
        }
    }
}

/// Runs every oracle check with the given configuration, sorted by check name.
pub fn run_suite(cfg: &OracleConfig) -> Result<Vec<ValidationOutcome>> {
    cfg.validate()?;
    let mut out = Vec::new();

    for n in [1usize, 3, 10, 100] {
        out.extend(mc_error_norm_moments(&NoiseModel::new(1.0, n)?, cfg));
    }
    for n in [1usize, 2, 3, 10, 50] {
        out.push(quad_error_norm_normalization(&NoiseModel::new(1.0, n)?, cfg));
    }

    let mut rng = rng_for(cfg.rng_seed, "evidence.known_sigma");
    for i in 0..6 {
        let m = 1 + i % 2;
        let n = rng.random_range(m + 1..=8);
        let sigma = rng.random_range(0.3..2.0);
        let (x, y) = random_instance(&mut rng, n, m, sigma);
        let f = fit(&x, &y)?;
        let mode = if i < 3 { BoundMode::Exact } else { BoundMode::Approximate };
        let spec = PriorSpec::known(sigma)
            .with_bound_mode(mode)
            .with_k(rng.random_range(0.0..6.0));
        let o = quad_evidence_known_sigma(&x, &y, &f, &spec, cfg)?;
        out.push(o.named(format!("evidence.known_sigma.case{i}.n={n}.m={m}")));
    }

    {
        let x = DesignMatrix::from_matrix(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]))?;
        let f = fit(&x, &[0.3, 1.0])?;
        let spec = PriorSpec::jeffreys().with_k(1.0);
        out.push(quad_evidence_unknown_sigma(&f, &x, &spec, cfg)?.named("evidence.unknown_sigma.reference.n=2.m=1"));
    }
    let mut rng = rng_for(cfg.rng_seed, "evidence.unknown_sigma");
    for i in 0..6 {
        let n = rng.random_range(3..=20);
        let m = rng.random_range(1..=(n - 1).min(4));
        let sigma = rng.random_range(0.2..3.0);
        let (x, y) = random_instance(&mut rng, n, m, sigma);
        let f = fit(&x, &y)?;
        let spec = PriorSpec::jeffreys()
            .with_k(rng.random_range(0.0..8.0))
            .with_jeffreys_a(rng.random_range(0.5..2.0));
        let o = quad_evidence_unknown_sigma(&f, &x, &spec, cfg)?;
        out.push(o.named(format!("evidence.unknown_sigma.case{i}.n={n}.m={m}")));
    }

    let mut rng = rng_for(cfg.rng_seed, "posterior.student_t");
    for n in [2usize, 5, 50] {
        let (x, y) = random_instance(&mut rng, n, 1, 1.0);
        let post = posterior_unknown_sigma(&fit(&x, &y)?, &x)?;
        out.push(quad_student_t_normalization(&post, cfg)?);
    }

    let mut rng = rng_for(cfg.rng_seed, "posterior.marginalization");
    for (case, (n, m)) in [(6usize, 1usize), (10, 2)].into_iter().enumerate() {
        let (x, y) = random_instance(&mut rng, n, m, 0.8);
        let f = fit(&x, &y)?;
        for p in 0..4 {
            let beta: Vec<f64> = f.beta_hat.iter().map(|b| b + rng.random_range(-1.0..1.0)).collect();
            let o = quad_marginalization(&beta, &f, &x, cfg)?;
            out.push(o.named(format!("posterior.marginalization.case{case}.point{p}.n={n}.m={m}")));
        }
    }

    let mut rng = rng_for(cfg.rng_seed, "prior.ellipsoid_volume");
    for m in [2usize, 3] {
        let (x, _) = random_instance(&mut rng, 6, m, 1.0);
        let bound = max_error_norm(&NoiseModel::new(1.0, 6)?, 2.0, BoundMode::Exact)?;
        out.push(mc_ellipsoid_volume(&x, bound.value, cfg)?);
    }

    out.sort_by(|a, b| a.check_name.cmp(&b.check_name));
    Ok(out)
}
