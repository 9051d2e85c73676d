//! Bayesian model selection for linear regression with parsimonious uniform
//! coefficient priors.
//!
//! The prior on the coefficients is uniform over the ellipsoid of coefficient
//! vectors reachable from error vectors no longer than a k-sigma bound on
//! `‖e‖`. Its height is analytical, so the evidence of every candidate model
//! is closed-form and depends only on `N`, `m`, `‖y − ŷ‖`, and `k`.
//!
//! Module map:
//!
//! - [`data`], [`model`], [`design`]: datasets, basis terms, design matrices.
//! - [`ols`]: least-squares fit and the residual/coefficient split.
//! - [`error_norm`]: the distribution of `‖e‖` and the k-sigma bound.
//! - [`prior`]: ellipsoid volume and the prior height.
//! - [`evidence`]: log-evidence for known and unknown σ, model probabilities.
//! - [`posterior`]: normal and Student-t coefficient posteriors.
//! - [`oracle`]: quadrature and Monte Carlo cross-checks.

pub mod data;
pub mod design;
pub mod error;
pub mod error_norm;
pub mod evidence;
pub mod model;
pub mod ols;
pub mod oracle;
pub mod posterior;
pub mod prior;
pub mod special;

pub use data::Dataset;
pub use design::{build_design_matrix, gram_logdet, gram_schmidt, gram_schmidt_logdet, DesignMatrix};
pub use error::{Error, Result};
pub use error_norm::{
    error_norm_mean_var, error_norm_moment, error_norm_pdf, max_error_norm, BoundMode, ErrorBound,
    NoiseModel, DEFAULT_K,
};
pub use evidence::{
    log_common_factor, log_evidence, log_evidence_known_sigma, log_evidence_unknown_sigma,
    log_goodness_of_fit, log_occam_factor, model_posterior_probs, rank_reports, EvidenceReport,
    ModelRanking, RankedModel,
};
pub use model::{ModelSpec, Term};
pub use ols::{decompose_quadratic, fit, FitResult, QuadraticSplit};
pub use posterior::{
    credible_quadratic_level, log_joint_posterior_unknown_sigma, marginal_posterior_density,
    posterior_known_sigma, posterior_unknown_sigma, NormalPosterior, StudentTPosterior,
};
pub use prior::{
    ellipsoid_log_volume, parsimonious_prior, prior_log_height, scalar_beta_bounds, PriorDensity,
    PriorSpec, SigmaMode,
};
