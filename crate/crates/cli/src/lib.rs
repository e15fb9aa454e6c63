//! Experiment runner for Hilberg exponent estimation.
//!
//! Wraps `hilberg-core` with file formats (curve CSV, per-replicate
//! samples CSV, report and schedule JSON) and the parallel drivers behind
//! the `hilberg` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails domain checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod io;
pub mod run;

pub use config::{ExperimentConfig, ProcessConfig};
pub use error::{CliError, Result};
pub use io::{CurveRow, SampleRow, Source};
