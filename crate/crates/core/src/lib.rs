//! Low-rank matrix reconstruction from underdetermined linear measurements by
//! alternating strategies.
//!
//! Three estimators share one measurement model:
//!
//! - [`als`]: alternating least squares over the factors of `X = L R`, with
//!   optional lift-and-project onto a linear structure.
//! - [`ale`]: the alternating linear estimator, a structured least-squares
//!   start followed by alternating rank and structure projections.
//! - [`adls`]: alternating direction least squares, where each factor update
//!   is an ADMM step balancing the measurement fit against the structure.
//!
//! [`probgen`] and [`metrics`] provide the random problem instances and the
//! SRER figure of merit used by the benchmark harness.

pub mod adls;
pub mod ale;
pub mod als;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod probgen;
pub mod prony;
pub mod seed;
pub mod sensing;
pub mod solver;
pub mod structure;

pub use adls::{adls_solve, adls_solve_traced, svd_init, AdmmState, SpectralInit};
pub use ale::{ale_solve, ale_solve_traced, initial_param_fit};
pub use als::{als_solve, als_solve_traced};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use metrics::srer_db;
pub use sensing::{MeasurementModel, NoiseSpec};
pub use solver::{Estimate, Factorization, LeftUpdate, SolverOptions, Stage, TraceEvent};
pub use structure::{LinearStructure, StructureKind};
