//! File formats, verification campaigns and single-shot computations built
//! on `mre-core`. The `mre` binary is a thin clap front end over this crate.

pub mod campaign;
pub mod compute;
pub mod error;
pub mod json;

pub use error::{CliError, CliResult};
