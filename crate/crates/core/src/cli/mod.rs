//! Configuration, orchestration and reporting for the `bound` binary.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{RunConfig, RunMode};
pub use pipeline::{compute, run_convergence, run_pipeline, ConvergenceReport, RunFlags};
pub use report::RunReport;
