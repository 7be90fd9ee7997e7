//! Config-driven experiment runner: recipes, subcommands and run manifests.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod recipes;
pub mod runner;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
