//! Command-line front end for `randprod`: one mode per invocation, a JSON
//! config, and plot-ready outputs.

use std::path::PathBuf;

pub mod config;
pub mod run;

pub use config::{parse_config, Mode, RunConfig};
pub use run::{execute, run_cli, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] randprod::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
