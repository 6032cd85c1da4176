//! Alternating linear estimator: a structured least-squares start followed by
//! lift-and-project between the rank-`r` factorization and the structure family.
//!
//! The measurements are used only for the starting parameters; after that the
//! iteration alternates between the two constraint sets.

use crate::adls::{balanced_factors, check_structure};
use crate::error::Result;
use crate::linalg::{max_abs, numerical_rank, pinv, pinv_solve, Matrix, Vector};
use crate::sensing::MeasurementModel;
use crate::solver::{check_rank, objective, Estimate, Factorization, LeftUpdate, SolverOptions, Stage, TraceEvent, TraceSink};
use crate::structure::LinearStructure;

/// `h0 = argmin_h ||ybar - abar M_s h||`, minimum-norm when underdetermined.
pub fn initial_param_fit(model: &MeasurementModel, structure: &LinearStructure) -> Result<Vector> {
    check_structure(model, structure)?;
    if structure.is_identity() {
        return pinv_solve(model.abar(), model.ybar());
    }
    let design = model.abar() * structure.basis_matrix();
    pinv_solve(&design, model.ybar())
}

/// One factor fit against the structured matrix `sh = S(h_k)`.
///
/// Returns `(L, R)` with `R = L^+ sh` and `L` chosen by `mode`. A left factor
/// that has lost rank is replaced by the leading singular directions of `sh`.
pub(crate) fn factor_step(sh: &Matrix, r_prev: &Matrix, rank: usize, mode: LeftUpdate) -> Result<(Matrix, Matrix)> {
    let mut l = match mode {
        LeftUpdate::LeastSquares => sh * pinv(r_prev),
        LeftUpdate::FirstColumns => sh.columns(0, rank).into_owned(),
    };
    if numerical_rank(&l) < rank {
        log::debug!("ale: left factor lost rank; restarting from the truncated SVD");
        l = balanced_factors(sh, rank)?.l;
    }
    let r = pinv(&l) * sh;
    Ok((l, r))
}

pub fn ale_solve(model: &MeasurementModel, rank: usize, structure: &LinearStructure, opts: &SolverOptions) -> Result<Estimate> {
    ale_solve_traced(model, rank, structure, opts, &mut |_| {})
}

pub fn ale_solve_traced(
    model: &MeasurementModel,
    rank: usize,
    structure: &LinearStructure,
    opts: &SolverOptions,
    sink: TraceSink<'_>,
) -> Result<Estimate> {
    opts.validate()?;
    check_rank(model, rank)?;
    let mut h = initial_param_fit(model, structure)?;
    let mut sh = structure.apply(&h)?;
    sink(&TraceEvent {
        iteration: 0,
        stage: Stage::Init,
        objective: objective(model, &sh),
        primal_right: 0.0,
        primal_left: 0.0,
        stop_statistic: f64::INFINITY,
    });

    let start = balanced_factors(&sh, rank)?;
    let mut factors = start;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.k_max {
        let (l, r) = factor_step(&sh, &factors.r, rank, opts.left_update)?;
        factors = Factorization { l, r };
        let product = factors.product();
        h = structure.fit(&product)?;
        sh = structure.apply(&h)?;
        iterations += 1;
        let gap = max_abs(&(&sh - &product));
        sink(&TraceEvent {
            iteration: iterations,
            stage: Stage::Outer,
            objective: objective(model, &product),
            primal_right: 0.0,
            primal_left: 0.0,
            stop_statistic: gap,
        });
        if gap <= opts.epsilon {
            converged = true;
            break;
        }
    }
    let x_hat = factors.product();
    Ok(Estimate {
        final_residual: model.residual_norm(&x_hat),
        x_hat,
        factorization: factors,
        iterations,
        converged,
    })
}
