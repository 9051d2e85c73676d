//! Subcommand implementations. Each returns its report; `main` renders and writes it.

use std::path::{Path, PathBuf};

use occam_core::evidence::is_perfect_fit;
use occam_core::oracle::{run_suite, OracleConfig, ValidationOutcome};
use occam_core::{
    build_design_matrix, fit, log_evidence, posterior_known_sigma, posterior_unknown_sigma,
    rank_reports, BoundMode, Dataset, DesignMatrix, Error, EvidenceReport, FitResult, NoiseModel,
    PriorSpec, SigmaMode,
};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::input::{parse_dataset, parse_points, read_bytes};
use crate::models::{load_models, select_model, LoadedModel};
use crate::report::{
    input_digest, DensityPoint, FitReport, ModelRecord, PosteriorTable, RankMetadata, RankReport,
    TOOL_VERSION,
};

/// Dataset and models, loaded and validated together.
pub struct Inputs {
    pub data: Dataset,
    pub models: Vec<LoadedModel>,
    pub digest: String,
}

impl Inputs {
    pub fn load(input: &Path, models: &Path) -> CliResult<Self> {
        let data_bytes = read_bytes(input)?;
        let model_bytes = read_bytes(models)?;
        let data = parse_dataset(input, &data_bytes)?;
        let models = load_models(models, &model_bytes, &data)?;
        Ok(Self {
            data,
            models,
            digest: input_digest(&data_bytes, &model_bytes),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorOptions {
    pub k: f64,
    pub sigma: Option<f64>,
    pub bound_mode: Option<BoundMode>,
    pub jeffreys_a: f64,
}

impl Default for PriorOptions {
    fn default() -> Self {
        Self {
            k: occam_core::DEFAULT_K,
            sigma: None,
            bound_mode: None,
            jeffreys_a: 1.0,
        }
    }
}

impl PriorOptions {
    /// Known σ defaults to the exact bound; unknown σ only admits the approximate one.
    pub fn spec(&self) -> CliResult<PriorSpec> {
        let spec = match self.sigma {
            Some(s) => PriorSpec::known(s).with_bound_mode(self.bound_mode.unwrap_or(BoundMode::Exact)),
            None => {
                if self.bound_mode == Some(BoundMode::Exact) {
                    return Err(Error::ExactBoundUnsupported.into());
                }
                PriorSpec::jeffreys().with_jeffreys_a(self.jeffreys_a)
            }
        }
        .with_k(self.k);
        spec.validate()?;
        Ok(spec)
    }
}

struct Evaluated {
    label: String,
    x: DesignMatrix,
    fit: FitResult,
}

fn evaluate(data: &Dataset, model: &LoadedModel) -> CliResult<Evaluated> {
    let label = &model.spec.label;
    let x = build_design_matrix(data, &model.spec).map_err(|e| CliError::model(label, e))?;
    let y = data.column(&model.spec.response)?;
    let fit = fit(&x, y).map_err(|e| CliError::model(label, e))?;
    Ok(Evaluated {
        label: label.clone(),
        x,
        fit,
    })
}

pub fn cmd_fit(inputs: &Inputs, label: Option<&str>) -> CliResult<FitReport> {
    let model = select_model(&inputs.models, label)?;
    let e = evaluate(&inputs.data, model)?;
    Ok(FitReport {
        label: e.label,
        response: model.spec.response.clone(),
        n: e.fit.n,
        m: e.fit.m,
        columns: e.x.labels().to_vec(),
        beta_hat: e.fit.beta_hat,
        residual_norm: e.fit.residual_norm,
    })
}

pub fn cmd_rank(inputs: &Inputs, prior: &PriorOptions) -> CliResult<RankReport> {
    let spec = prior.spec()?;
    let results: Vec<CliResult<(String, EvidenceReport)>> = inputs
        .models
        .par_iter()
        .map(|m| {
            let e = evaluate(&inputs.data, m)?;
            if is_perfect_fit(&e.fit) {
                return Err(CliError::model(&e.label, Error::PerfectFit));
            }
            let report = log_evidence(&e.fit, &e.x, &spec).map_err(|err| CliError::model(&e.label, err))?;
            Ok((e.label, report))
        })
        .collect();
    // First failure in file order, regardless of scheduling.
    let reports = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let ranking = rank_reports(&reports, None)?;
    let models = ranking
        .entries
        .iter()
        .map(|entry| {
            let r = &reports
                .iter()
                .find(|(l, _)| *l == entry.label)
                .expect("ranking labels come from the reports")
                .1;
            ModelRecord {
                label: entry.label.clone(),
                n: r.n,
                m: r.m,
                residual_norm: r.residual_norm,
                log_occam: r.log_occam,
                log_gof: r.log_gof,
                log_common: r.log_common,
                log_evidence: r.log_evidence,
                posterior_prob: entry.posterior_prob,
            }
        })
        .collect();
    let (sigma, jeffreys_a) = match spec.sigma_mode {
        SigmaMode::Known { sigma } => (Some(sigma), None),
        SigmaMode::Jeffreys { a } => (None, Some(a)),
    };
    Ok(RankReport {
        metadata: RankMetadata {
            k: spec.k,
            sigma_mode: spec.sigma_mode.name().to_string(),
            sigma,
            jeffreys_a,
            bound_mode: spec.bound_mode,
            tool_version: TOOL_VERSION.to_string(),
            input_digest: inputs.digest.clone(),
        },
        models,
    })
}

pub fn cmd_posterior(
    inputs: &Inputs,
    label: Option<&str>,
    points: &PathBuf,
    sigma: Option<f64>,
) -> CliResult<PosteriorTable> {
    let model = select_model(&inputs.models, label)?;
    let e = evaluate(&inputs.data, model)?;
    let bytes = read_bytes(points)?;
    let betas = parse_points(points, &bytes, e.fit.m)?;
    let wrap = |err| CliError::model(&e.label, err);
    let evaluated: Vec<DensityPoint> = match sigma {
        Some(s) => {
            let post = posterior_known_sigma(&e.fit, &e.x, &NoiseModel::new(s, e.fit.n)?).map_err(wrap)?;
            betas
                .into_iter()
                .map(|b| {
                    let log_density = post.log_density(&b)?;
                    Ok(DensityPoint { beta: b, log_density, density: log_density.exp() })
                })
                .collect::<occam_core::Result<_>>()?
        }
        None => {
            let post = posterior_unknown_sigma(&e.fit, &e.x).map_err(wrap)?;
            betas
                .into_iter()
                .map(|b| {
                    let log_density = post.log_density(&b)?;
                    Ok(DensityPoint { beta: b, log_density, density: log_density.exp() })
                })
                .collect::<occam_core::Result<_>>()?
        }
    };
    Ok(PosteriorTable {
        label: e.label.clone(),
        sigma_mode: if sigma.is_some() { "known" } else { "jeffreys" }.to_string(),
        sigma,
        columns: e.x.labels().to_vec(),
        points: evaluated,
    })
}

/// Runs the oracle suite. The outcomes are returned even when checks fail so
/// that they can be printed before the failure exit.
pub fn cmd_validate(cfg: &OracleConfig) -> CliResult<(Vec<ValidationOutcome>, Option<CliError>)> {
    let outcomes = run_suite(cfg)?;
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    let status = (failed > 0).then(|| CliError::ChecksFailed {
        failed,
        total: outcomes.len(),
    });
    Ok((outcomes, status))
}
