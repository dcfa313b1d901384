//! File formats, configuration and subcommands of the `anafft` command-line
//! tool. The simulation itself lives in `anafft-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, CliResult};
