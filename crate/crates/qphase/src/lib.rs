//! Command-line front end and file formats for `qphase-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod hamiltonian;
pub mod output;

pub use commands::run;
pub use error::{CliError, Result};
