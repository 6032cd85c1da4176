//! Alternating least squares: cyclic exact least-squares updates of the two
//! factors of `X = L R`, with optional lift-and-project onto a linear structure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::adls::{check_structure, svd_init};
use crate::error::Result;
use crate::linalg::{left_factor_matrix, mat, pinv, pinv_solve, right_factor_matrix, Matrix};
use crate::sensing::MeasurementModel;
use crate::solver::{check_rank, objective, Estimate, Factorization, SolverOptions, Stage, TraceEvent, TraceSink};
use crate::structure::LinearStructure;

/// Objective values below this fraction of `||ybar||^2` count as an exact fit.
const EXACT_FIT_RTOL: f64 = 1e-28;

/// Exact minimizer of `||ybar - abar vec(L R)||` over `R`.
pub fn als_update_r(model: &MeasurementModel, l: &Matrix) -> Result<Matrix> {
    let m = right_factor_matrix(model.abar(), l)?;
    let v = pinv_solve(&m, model.ybar())?;
    mat(&v, l.ncols(), model.n2())
}

/// Exact minimizer of `||ybar - abar vec(L R)||` over `L`.
pub fn als_update_l(model: &MeasurementModel, r: &Matrix) -> Result<Matrix> {
    let n = left_factor_matrix(model.abar(), r)?;
    let v = pinv_solve(&n, model.ybar())?;
    mat(&v, model.n1(), r.nrows())
}

/// `argmin_R ||L R - X_hat||_F = L^+ X_hat`.
pub fn refit_factor(l: &Matrix, x_hat: &Matrix) -> Matrix {
    pinv(l) * x_hat
}

/// `argmin_L ||L R - X_hat||_F = X_hat R^+`.
pub fn refit_left_factor(r: &Matrix, x_hat: &Matrix) -> Matrix {
    x_hat * pinv(r)
}

/// Alternating least squares from the spectral start.
///
/// With a structure, each half-step is followed by projecting the product onto
/// the structure family and refitting the factor just updated. `seed` drives
/// the random start used when the spectral start is degenerate.
pub fn als_solve(
    model: &MeasurementModel,
    rank: usize,
    structure: Option<&LinearStructure>,
    opts: &SolverOptions,
    seed: u64,
) -> Result<Estimate> {
    als_solve_traced(model, rank, structure, opts, seed, &mut |_| {})
}

pub fn als_solve_traced(
    model: &MeasurementModel,
    rank: usize,
    structure: Option<&LinearStructure>,
    opts: &SolverOptions,
    seed: u64,
    sink: TraceSink<'_>,
) -> Result<Estimate> {
    opts.validate()?;
    check_rank(model, rank)?;
    if let Some(s) = structure {
        check_structure(model, s)?;
    }
    let init = svd_init(model, rank)?;
    let (mut l, mut r) = if init.degenerate {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = Matrix::from_fn(model.n1(), rank, |_, _| StandardNormal.sample(&mut rng));
        (l, init.factors.r)
    } else {
        (init.factors.l, init.factors.r)
    };

    let floor = EXACT_FIT_RTOL * model.ybar().norm_squared();
    let mut prev = objective(model, &(&l * &r));
    let event = |iteration, stage, objective| TraceEvent {
        iteration,
        stage,
        objective,
        primal_right: 0.0,
        primal_left: 0.0,
        stop_statistic: f64::INFINITY,
    };
    sink(&event(0, Stage::Init, prev));

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.k_max {
        iterations += 1;
        r = als_update_r(model, &l)?;
        if let Some(s) = structure {
            let x_hat = s.project(&(&l * &r))?;
            r = refit_factor(&l, &x_hat);
        }
        sink(&event(iterations, Stage::RightHalf, objective(model, &(&l * &r))));

        l = als_update_l(model, &r)?;
        if let Some(s) = structure {
            let x_hat = s.project(&(&l * &r))?;
            l = refit_left_factor(&r, &x_hat);
        }
        let current = objective(model, &(&l * &r));
        let decrease = (prev - current).abs() / prev.max(1e-30);
        sink(&TraceEvent {
            stop_statistic: decrease,
            ..event(iterations, Stage::LeftHalf, current)
        });
        if !current.is_finite() {
            log::warn!("als: non-finite objective at iteration {iterations}");
            break;
        }
        if decrease < opts.epsilon || current <= floor {
            converged = true;
            break;
        }
        prev = current;
    }
    let factorization = Factorization { l, r };
    let x_hat = factorization.product();
    Ok(Estimate {
        final_residual: model.residual_norm(&x_hat),
        x_hat,
        factorization,
        iterations,
        converged,
    })
}
