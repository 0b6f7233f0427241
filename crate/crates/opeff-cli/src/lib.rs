//! Command-line surface, file formats, and report emission for the
//! operation-modeling toolkit.
//!
//! Three commands cover the workflow:
//!
//! * `simulate` — run one heating operation, write its signal log and a
//!   summary report;
//! * `sweep` — run the drive grid from the config, write the sweep report
//!   and plot-ready series files, and print the optimum per criterion;
//! * `analyze` — ingest a recorded signal log, run the model chain, and
//!   write the summary plus the deployed curves.
//!
//! File formats are plain text: TOML for configs and structured reports, CSV
//! with a `#`-prefixed metadata block for signal logs and series files.
//! Report emission is deterministic — identical inputs produce byte-identical
//! files.

// Validation deliberately writes `!(x > 0.0)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod signal_log;

pub use error::CliError;

/// Exit codes: 0 success, 1 I/O, 2 validation, 3 configuration coverage.
pub fn exit_code(err: &CliError) -> i32 {
    err.exit_code()
}
