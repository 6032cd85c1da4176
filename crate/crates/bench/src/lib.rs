//! Monte-Carlo benchmark harness: sweeps sampling fraction and SMNR, runs the
//! estimators on shared problem instances and reports SRER.

pub mod config;
pub mod report;
pub mod sweep;

pub use config::{Algo, SweepConfig};
pub use report::{aggregate, emit_csv, read_csv, SummaryRow};
pub use sweep::{run_sweep, TrialRecord};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Solver(#[from] altrecon::Error),
}
