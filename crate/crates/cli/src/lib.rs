//! Batch runner for the `mdcon` solvers: reads run configurations, executes
//! single runs or sweeps, and writes plot-ready CSV and JSON artifacts.

pub mod config;
pub mod error;
pub mod harness;

pub use config::{Algorithm, OneOrMany, RunConfig, OUTPUT_DIR_ENV};
pub use error::{ErrorRecord, HarnessError};
pub use harness::{load_problem, run, sample_point, ComparisonRow, Outcome, RunRecord, RunSummary};
