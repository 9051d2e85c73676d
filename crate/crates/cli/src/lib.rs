//! Library side of the `occam` command-line tool: input parsing, model files,
//! subcommands, and report rendering.

pub mod commands;
pub mod error;
pub mod input;
pub mod models;
pub mod report;

pub use commands::{cmd_fit, cmd_posterior, cmd_rank, cmd_validate, Inputs, PriorOptions};
pub use error::{CliError, CliResult};
pub use report::{Format, RankReport};
