//! Command-line front end for `refram`: configuration, report rendering and
//! the grid verification harness.

pub mod commands;
pub mod config;
pub mod error;
pub mod parse;

pub use config::{parse_config, RunConfig};
pub use error::CliError;
pub use parse::{parse_omega, parse_polynomial};
