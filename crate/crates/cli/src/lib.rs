//! Commands behind the `landing` binary: train, eval, detect, render, plot.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod detect;
pub mod error;
pub mod eval;
pub mod plot;
pub mod render;
pub mod train;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
