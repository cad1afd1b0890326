//! Command-line front end for `tdaband`.

pub mod bands;
pub mod commands;
pub mod error;
pub mod experiment;
pub mod svg;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
