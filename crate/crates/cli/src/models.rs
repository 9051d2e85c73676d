//! Model specification files.
//!
//! A models file is TOML with an optional top-level `response` and one
//! `[[model]]` table per candidate:
//!
//! ```toml
//! response = "y"
//!
//! [[model]]
//! label = "cubic spline"
//! terms = ["intercept", "poly(x, 3)", "tpow(x, 3, [0.25, 0.5, 0.75])"]
//! ```
//!
//! Term grammar: `intercept` (or `1`), a bare column name, `poly(col, d)` for
//! the powers `col¹..col^d`, and `tpow(col, d, [t1, t2, ...])` for truncated
//! powers `max(col − t, 0)^d`.

use std::collections::HashMap;
use std::path::Path;

use occam_core::{Dataset, ModelSpec, Term};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelsFile {
    response: Option<String>,
    #[serde(default)]
    model: Vec<RawModel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    label: Spanned<String>,
    response: Option<Spanned<String>>,
    terms: Vec<Spanned<String>>,
}

/// A validated model together with the line of its label in the source file.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub spec: ModelSpec,
    pub line: usize,
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

fn parse_degree(s: &str) -> Result<u32, String> {
    match s.trim().parse::<u32>() {
        Ok(d) if d >= 1 => Ok(d),
        _ => Err(format!("degree must be a positive integer, got `{}`", s.trim())),
    }
}

fn parse_column(s: &str) -> Result<String, String> {
    let s = s.trim();
    if s.is_empty() || s.contains(['(', ')', '[', ']', ',']) {
        return Err(format!("`{s}` is not a column name"));
    }
    Ok(s.to_string())
}

/// Parses one term expression.
pub fn parse_term(text: &str) -> Result<Term, String> {
    let t = text.trim();
    if t == "intercept" || t == "1" {
        return Ok(Term::Intercept);
    }
    let Some(open) = t.find('(') else {
        return parse_column(t).map(Term::raw);
    };
    if !t.ends_with(')') {
        return Err(format!("unbalanced parentheses in `{t}`"));
    }
    let name = t[..open].trim();
    let args = &t[open + 1..t.len() - 1];
    match name {
        "poly" => {
            let parts: Vec<&str> = args.split(',').collect();
            let [column, degree] = parts[..] else {
                return Err(format!("`{t}`: poly takes (column, degree)"));
            };
            Ok(Term::polynomial(parse_column(column)?, parse_degree(degree)?))
        }
        "tpow" => {
            let (head, knots) = match (args.find('['), args.rfind(']')) {
                (Some(a), Some(b)) if a < b && args[b + 1..].trim().is_empty() => {
                    (&args[..a], &args[a + 1..b])
                }
                _ => return Err(format!("`{t}`: tpow takes (column, degree, [knots])")),
            };
            let parts: Vec<&str> = head.split(',').collect();
            let [column, degree, rest] = parts[..] else {
                return Err(format!("`{t}`: tpow takes (column, degree, [knots])"));
            };
            if !rest.trim().is_empty() {
                return Err(format!("`{t}`: unexpected `{}` before the knot list", rest.trim()));
            }
            let knots = knots
                .split(',')
                .filter(|k| !k.trim().is_empty())
                .map(|k| {
                    k.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("`{t}`: knot `{}` is not a number", k.trim()))
                })
                .collect::<Result<Vec<f64>, String>>()?;
            Ok(Term::truncated_power(parse_column(column)?, parse_degree(degree)?, knots))
        }
        other => Err(format!("unknown term function `{other}` in `{t}`")),
    }
}

/// Parses and validates a models file against `data`.
pub fn load_models(path: &Path, bytes: &[u8], data: &Dataset) -> CliResult<Vec<LoadedModel>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::parse(path, 1, format!("models file is not UTF-8: {e}")))?;
    let file: ModelsFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of(text, s.start));
        CliError::parse(path, line, e.message().to_string())
    })?;
    if file.model.is_empty() {
        return Err(CliError::parse(path, 1, "no [[model]] entries"));
    }

    let spec_error = |line: usize, message: String| CliError::Spec {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut shared_response: Option<String> = None;
    let mut out = Vec::with_capacity(file.model.len());
    for raw in file.model {
        let line = line_of(text, raw.label.span().start);
        let label = raw.label.into_inner();
        if let Some(first) = seen.insert(label.clone(), line) {
            return Err(spec_error(line, format!("duplicate model label `{label}` (first on line {first})")));
        }
        let response = match (raw.response, &file.response) {
            (Some(r), _) => r.into_inner(),
            (None, Some(r)) => r.clone(),
            (None, None) => return Err(spec_error(line, format!("model `{label}` has no response column"))),
        };
        match &shared_response {
            Some(r) if *r != response => {
                return Err(spec_error(
                    line,
                    format!("model `{label}` uses response `{response}` but earlier models use `{r}`"),
                ))
            }
            Some(_) => {}
            None => shared_response = Some(response.clone()),
        }
        let terms = raw
            .terms
            .into_iter()
            .map(|t| {
                let term_line = line_of(text, t.span().start);
                parse_term(t.get_ref()).map_err(|msg| CliError::parse(path, term_line, msg))
            })
            .collect::<CliResult<Vec<Term>>>()?;
        let spec = ModelSpec::new(label.clone(), response, terms);
        spec.validate(data)
            .map_err(|e| spec_error(line, format!("model `{label}`: {e}")))?;
        out.push(LoadedModel { spec, line });
    }
    Ok(out)
}

/// Picks the model named `label`, or the only model when no label is given.
pub fn select_model<'a>(models: &'a [LoadedModel], label: Option<&str>) -> CliResult<&'a LoadedModel> {
    match label {
        Some(l) => models
            .iter()
            .find(|m| m.spec.label == l)
            .ok_or_else(|| CliError::Invalid(format!("no model labelled `{l}`"))),
        None if models.len() == 1 => Ok(&models[0]),
        None => Err(CliError::Invalid(format!(
            "{} models in the file; choose one with --model",
            models.len()
        ))),
    }
}
