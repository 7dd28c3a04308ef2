//! The `chunkorder` command line: TOML configuration, single-table
//! subcommands and the full report bundle.

pub mod commands;
pub mod config;
mod error;
pub mod report;
pub mod svg;
pub mod tables;

pub use commands::run;
pub use config::{CorpusEntry, PipelineConfig, Rounding, SemanticsConfig};
pub use error::{CliError, ErrorKind};
pub use report::{build_bundle, run_report, write_bundle, Bundle};
