//! File formats and command handlers behind the `segcodec` binary.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod rle;
pub mod sweep;

pub use error::{CliError, CliResult};
pub use manifest::{manifest_path, RunManifest};
