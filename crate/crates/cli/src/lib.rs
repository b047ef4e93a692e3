//! Command-line front end: file formats, run manifests and subcommands.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod pnm;

pub use commands::{run, Cli};
pub use error::CliError;
pub use manifest::Manifest;
