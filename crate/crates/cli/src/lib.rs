//! Command line front end: TOML configs, subcommands, JSON/CSV/SVG output.

pub mod c4;
pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

pub use config::{Format, RunConfig};
pub use error::{CliError, Status};
