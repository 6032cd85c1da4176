//! Types shared by the alternating solvers.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sensing::MeasurementModel;

/// How the alternating linear estimator picks its left factor each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeftUpdate {
    /// `L = S(h) R^+`, the least-squares fit against the previous right factor.
    #[default]
    LeastSquares,
    /// `L` = the first `r` columns of `S(h)`.
    FirstColumns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stop tolerance. Its meaning depends on the solver's stop statistic.
    pub epsilon: f64,
    pub k_max: usize,
    /// ADMM penalty.
    pub lambda: f64,
    /// Dual step.
    pub lambda_prime: f64,
    /// Weight of the structure term `mu ||S Z - X_hat||_F^2`.
    pub mu: f64,
    pub inner_tol_primal: f64,
    pub inner_tol_dual: f64,
    /// ADMM cycles per factor per outer iteration (1 = one step, as in the printed algorithm).
    pub inner_max: usize,
    pub left_update: LeftUpdate,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-8,
            k_max: 500,
            lambda: 0.5,
            lambda_prime: 0.5,
            mu: 1.0,
            inner_tol_primal: 1e-8,
            inner_tol_dual: 1e-8,
            inner_max: 1,
            left_update: LeftUpdate::LeastSquares,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("lambda", self.lambda),
            ("lambda_prime", self.lambda_prime),
            ("inner_tol_primal", self.inner_tol_primal),
            ("inner_tol_dual", self.inner_tol_dual),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Input(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::Input(format!("mu must be nonnegative, got {}", self.mu)));
        }
        if self.k_max == 0 || self.inner_max == 0 {
            return Err(Error::Input("k_max and inner_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Low-rank factor pair with `X = L R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    /// `n1 x r`
    pub l: Matrix,
    /// `r x n2`
    pub r: Matrix,
}

impl Factorization {
    pub fn rank(&self) -> usize {
        self.l.ncols()
    }

    pub fn product(&self) -> Matrix {
        &self.l * &self.r
    }
}

/// Solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub x_hat: Matrix,
    pub factorization: Factorization,
    pub iterations: usize,
    /// `||ybar - abar vec(x_hat)||_2`
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Before the first update.
    Init,
    /// After the right-factor half-step.
    RightHalf,
    /// After the left-factor half-step.
    LeftHalf,
    /// End of an outer iteration.
    Outer,
}

/// One record of a solver's progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub iteration: usize,
    pub stage: Stage,
    /// Squared measurement residual `J = ||ybar - abar vec(X)||^2` of the current product.
    pub objective: f64,
    /// `||R - Z||_F` (zero for solvers without a split).
    pub primal_right: f64,
    /// `||L - S||_F` (zero for solvers without a split).
    pub primal_left: f64,
    /// The quantity compared against `epsilon`.
    pub stop_statistic: f64,
}

/// Receives trace events; `|_| {}` discards them.
pub type TraceSink<'a> = &'a mut dyn FnMut(&TraceEvent);

pub(crate) fn check_rank(model: &MeasurementModel, r: usize) -> Result<()> {
    let max = model.n1().min(model.n2());
    if r == 0 || r > max {
        return Err(Error::Rank { rank: r, max });
    }
    Ok(())
}

pub(crate) fn objective(model: &MeasurementModel, x: &Matrix) -> f64 {
    model.residual_norm(x).powi(2)
}
