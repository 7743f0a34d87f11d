//! Library side of the `axode` command: each subcommand is a plain function
//! so it can be driven from tests without spawning the binary.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod extract;
pub mod output;
pub mod plot;
pub mod synth;

pub use error::{CliError, Result};
