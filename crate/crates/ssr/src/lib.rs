//! Scenario configuration, CSV formats and command implementations for the
//! `ssr` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod scenarios;

pub use config::Scenario;
pub use error::{CliError, CliResult};
