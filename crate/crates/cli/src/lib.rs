//! Configuration-driven front end: experiment configs, CSV tables and the
//! subcommands of the `engine` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use error::{CliError, Result};
