//! Benchmark harness and file formats for `masolve-core`: timed single
//! solves, convergence studies over mesh sizes, CSV/JSON output and slope
//! fits. The `masolve` binary is a thin command-line layer over this crate.

pub mod error;
pub mod harness;
pub mod output;

pub use error::{HarnessError, Result};
pub use harness::{
    fit_report, run_solve, run_study, FitLine, Method, Overrides, SolveOutcome, StudyConfig,
    StudyRecord,
};
