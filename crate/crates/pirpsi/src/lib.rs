//! Command-line harness for `pirpsi-core`: configuration, message store files,
//! wire encodings, reports, and the subcommands behind the `pirpsi` binary.

pub mod commands;
pub mod config;
pub mod db;
pub mod report;
pub mod table1;
pub mod wire;

pub use commands::{exit_code, HarnessError};
pub use config::{ExperimentConfig, Format, RawConfig};
pub use report::Report;
