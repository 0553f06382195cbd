//! Command-line front end for `gfix-core`: a catalog of named spaces, maps
//! and gauges, JSON run configuration, report files and orbit traces.
//!
//! Exit codes: 0 verified or converged, 1 violation, counterexample or
//! non-convergence, 2 usage, configuration or cap error.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod trace;

pub use cli::run;
pub use error::CliError;
