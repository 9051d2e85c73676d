//! Report types and their JSON / CSV renderings.

use occam_core::BoundMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 over the length-prefixed dataset and models bytes.
pub fn input_digest(dataset: &[u8], models: &[u8]) -> String {
    let mut h = Sha256::new();
    for part in [dataset, models] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMetadata {
    pub k: f64,
    pub sigma_mode: String,
    pub sigma: Option<f64>,
    pub jeffreys_a: Option<f64>,
    pub bound_mode: BoundMode,
    pub tool_version: String,
    pub input_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub label: String,
    pub n: usize,
    pub m: usize,
    pub residual_norm: f64,
    pub log_occam: f64,
    pub log_gof: f64,
    pub log_common: f64,
    pub log_evidence: f64,
    pub posterior_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub metadata: RankMetadata,
    /// Sorted by posterior probability (descending), then label.
    pub models: Vec<ModelRecord>,
}

/// Shortest round-trip form, switching to exponent notation at the extremes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

fn csv_table(comments: &[(&str, String)], header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (k, v) in comments {
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input"));
    out
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

impl RankReport {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let m = &self.metadata;
                let bound = match m.bound_mode {
                    BoundMode::Exact => "exact",
                    BoundMode::Approximate => "approximate",
                };
                let comments = [
                    ("k", num(m.k)),
                    ("sigma_mode", m.sigma_mode.clone()),
                    ("sigma", opt(m.sigma)),
                    ("jeffreys_a", opt(m.jeffreys_a)),
                    ("bound_mode", bound.to_string()),
                    ("tool_version", m.tool_version.clone()),
                    ("input_digest", m.input_digest.clone()),
                ];
                let header: Vec<String> = [
                    "label",
                    "n",
                    "m",
                    "residual_norm",
                    "log_occam",
                    "log_gof",
                    "log_common",
                    "log_evidence",
                    "posterior_prob",
                ]
                .map(String::from)
                .to_vec();
                let rows: Vec<Vec<String>> = self
                    .models
                    .iter()
                    .map(|r| {
                        vec![
                            r.label.clone(),
                            r.n.to_string(),
                            r.m.to_string(),
                            num(r.residual_norm),
                            num(r.log_occam),
                            num(r.log_gof),
                            num(r.log_common),
                            num(r.log_evidence),
                            num(r.posterior_prob),
                        ]
                    })
                    .collect();
                csv_table(&comments, &header, &rows)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub label: String,
    pub response: String,
    pub n: usize,
    pub m: usize,
    pub columns: Vec<String>,
    pub beta_hat: Vec<f64>,
    pub residual_norm: f64,
}

impl FitReport {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let comments = [
                    ("label", self.label.clone()),
                    ("response", self.response.clone()),
                    ("n", self.n.to_string()),
                    ("m", self.m.to_string()),
                    ("residual_norm", num(self.residual_norm)),
                ];
                let rows: Vec<Vec<String>> = self
                    .columns
                    .iter()
                    .zip(&self.beta_hat)
                    .map(|(c, b)| vec![c.clone(), num(*b)])
                    .collect();
                csv_table(&comments, &["column".into(), "beta_hat".into()], &rows)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub beta: Vec<f64>,
    pub log_density: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTable {
    pub label: String,
    pub sigma_mode: String,
    pub sigma: Option<f64>,
    pub columns: Vec<String>,
    pub points: Vec<DensityPoint>,
}

impl PosteriorTable {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let comments = [
                    ("label", self.label.clone()),
                    ("sigma_mode", self.sigma_mode.clone()),
                    ("sigma", opt(self.sigma)),
                ];
                let mut header = self.columns.clone();
                header.push("log_density".into());
                header.push("density".into());
                let rows: Vec<Vec<String>> = self
                    .points
                    .iter()
                    .map(|p| {
                        let mut r: Vec<String> = p.beta.iter().copied().map(num).collect();
                        r.push(num(p.log_density));
                        r.push(num(p.density));
                        r
                    })
                    .collect();
                csv_table(&comments, &header, &rows)
            }
        }
    }
}
