//! Experiment runner, file formats and command-line interface for
//! `mbt-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod hardness;
pub mod output;
pub mod runner;
pub mod scaling;
pub mod verify;

pub use error::{CliError, Result};
