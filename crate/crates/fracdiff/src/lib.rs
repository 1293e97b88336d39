//! Command-line front end for `fracdiff-core`: JSON configuration, CSV
//! output and run manifests.
//!
//! Exit statuses: 0 success, 1 usage or configuration error, 2 numerical
//! error, 3 `solve` aborted on a non-finite field. Failures print one JSON
//! record on stderr.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

pub use cli::run;
pub use error::CliError;
