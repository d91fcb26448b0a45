//! File formats, verification suites and the command-line front end for
//! `volflow-core`.

pub mod config;
pub mod error;
pub mod jets;
pub mod path;
pub mod report;
pub mod suites;

pub use config::{Format, NRange, RunConfig, Tolerances};
pub use error::CliError;
pub use report::{CheckResult, SuiteReport};
