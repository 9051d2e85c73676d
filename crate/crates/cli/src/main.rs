use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use occam_cli::{cmd_fit, cmd_posterior, cmd_rank, cmd_validate, CliError, CliResult, Format, Inputs, PriorOptions};
use occam_core::oracle::OracleConfig;
use occam_core::BoundMode;

/// Rank linear regression models by their evidence under a parsimonious
/// uniform coefficient prior.
#[derive(Parser)]
#[command(name = "occam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Least-squares fit of one model.
    Fit {
        #[command(flatten)]
        files: Files,
        /// Model label; optional when the file holds a single model.
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Evidence, Occam factor, and posterior probability of every model.
    Rank {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        prior: Prior,
        #[command(flatten)]
        out: Output,
    },
    /// Coefficient posterior density at the points of a CSV file.
    Posterior {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        model: Option<String>,
        /// CSV with one column per coefficient and one point per row.
        #[arg(long)]
        points: PathBuf,
        /// Known noise σ; without it σ is integrated out.
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Run the numerical oracle suite and print the outcomes as JSON.
    Validate {
        #[arg(long, env = "OCCAM_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        mc_samples: usize,
        /// Fixed absolute tolerance for the Monte Carlo checks.
        #[arg(long)]
        mc_tolerance: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Files {
    /// Dataset CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// TOML models file.
    #[arg(long)]
    models: PathBuf,
}

#[derive(Args)]
struct Prior {
    #[arg(long, default_value_t = occam_core::DEFAULT_K)]
    k: f64,
    /// Known noise σ; without it the Jeffreys prior is used.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_enum)]
    bound_mode: Option<Bound>,
    #[arg(long, default_value_t = 1.0)]
    jeffreys_a: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bound {
    Exact,
    Approximate,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(text: &str, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit { files, model, out } => {
            let inputs = Inputs::load(&files.input, &files.models)?;
            let report = cmd_fit(&inputs, model.as_deref())?;
            emit(&report.render(out.format), out.output.as_ref())
        }
        Command::Rank { files, prior, out } => {
            let inputs = Inputs::load(&files.input, &files.models)?;
            let options = PriorOptions {
                k: prior.k,
                sigma: prior.sigma,
                bound_mode: prior.bound_mode.map(|b| match b {
                    Bound::Exact => BoundMode::Exact,
                    Bound::Approximate => BoundMode::Approximate,
                }),
                jeffreys_a: prior.jeffreys_a,
            };
            let report = cmd_rank(&inputs, &options)?;
            emit(&report.render(out.format), out.output.as_ref())
        }
        Command::Posterior { files, model, points, sigma, out } => {
            let inputs = Inputs::load(&files.input, &files.models)?;
            let table = cmd_posterior(&inputs, model.as_deref(), &points, sigma)?;
            emit(&table.render(out.format), out.output.as_ref())
        }
        Command::Validate { seed, mc_samples, mc_tolerance, output } => {
            let cfg = OracleConfig {
                rng_seed: seed,
                mc_samples,
                mc_tolerance,
                ..OracleConfig::default()
            };
            let (outcomes, status) = cmd_validate(&cfg)?;
            let mut text = serde_json::to_string_pretty(&outcomes).expect("outcomes serialize");
            text.push('\n');
            emit(&text, output.as_ref())?;
            status.map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
