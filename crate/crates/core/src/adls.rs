//! Alternating direction least squares: alternating factor updates where each
//! factor is refreshed by an ADMM step on an augmented Lagrangian.
//!
//! For the right factor the split is `R = Z` with
//!
//! ```text
//! f(R) = ||ybar - P vec(R)||^2,      P = abar (I ⊗ S)
//! g(Z) = mu ||S Z - X_hat||_F^2
//! L(R, Z, U) = f(R) + g(Z) + lambda ||R - Z + U||_F^2
//! ```
//!
//! and the left factor mirrors it with `L = S`, dual `T` and `Q = abar (Z^T ⊗ I)`.
//! Every primal update is the exact minimizer of its quadratic subproblem.

use crate::ale;
use crate::error::Result;
use crate::linalg::{left_factor_matrix, mat, max_abs, right_factor_matrix, spd_solve, truncated_svd, vectorize, Matrix, Vector};
use crate::sensing::MeasurementModel;
use crate::solver::{check_rank, objective, Estimate, Factorization, SolverOptions, Stage, TraceEvent, TraceSink};
use crate::structure::LinearStructure;

/// Spectral starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInit {
    pub factors: Factorization,
    /// Set when `abar^T ybar` is identically zero and the factors are all zeros.
    pub degenerate: bool,
}

/// Truncated SVD of `mat(abar^T ybar)` split as `L = U sqrt(Sigma)`, `R = sqrt(Sigma) V^T`.
pub fn svd_init(model: &MeasurementModel, r: usize) -> Result<SpectralInit> {
    check_rank(model, r)?;
    let (n1, n2) = (model.n1(), model.n2());
    let b = mat(&(model.abar().transpose() * model.ybar()), n1, n2)?;
    if max_abs(&b) == 0.0 {
        return Ok(SpectralInit {
            factors: Factorization { l: Matrix::zeros(n1, r), r: Matrix::zeros(r, n2) },
            degenerate: true,
        });
    }
    Ok(SpectralInit { factors: balanced_factors(&b, r)?, degenerate: false })
}

/// Rank-`r` truncation of `x` with the singular values split evenly between the factors.
pub(crate) fn balanced_factors(x: &Matrix, r: usize) -> Result<Factorization> {
    let t = truncated_svd(x, r)?;
    let mut l = t.u;
    let mut rt = t.v;
    for k in 0..r {
        let s = t.sigma[k].sqrt();
        l.column_mut(k).scale_mut(s);
        rt.column_mut(k).scale_mut(s);
    }
    Ok(Factorization { l, r: rt.transpose() })
}

/// Augmented Lagrangian of the right-factor split,
/// `f(R) + mu ||S Z - X_hat||_F^2 + lambda ||R - Z + U||_F^2`.
#[allow(clippy::too_many_arguments)]
pub fn augmented_lagrangian(
    model: &MeasurementModel,
    s: &Matrix,
    x_hat: &Matrix,
    r: &Matrix,
    z: &Matrix,
    u: &Matrix,
    lambda: f64,
    mu: f64,
) -> f64 {
    let fit = objective(model, &(s * r));
    let structure = (s * z - x_hat).norm_squared();
    let penalty = (r - z + u).norm_squared();
    fit + mu * structure + lambda * penalty
}

/// Augmented Lagrangian of the left-factor split,
/// `||ybar - Q vec(L)||^2 + mu ||S Z - X_hat||_F^2 + lambda ||L - S + T||_F^2`.
#[allow(clippy::too_many_arguments)]
pub fn augmented_lagrangian_left(
    model: &MeasurementModel,
    z: &Matrix,
    x_hat: &Matrix,
    l: &Matrix,
    s: &Matrix,
    t: &Matrix,
    lambda: f64,
    mu: f64,
) -> f64 {
    let fit = objective(model, &(l * z));
    let structure = (s * z - x_hat).norm_squared();
    let penalty = (l - s + t).norm_squared();
    fit + mu * structure + lambda * penalty
}

/// `vec(R+) = (P^T P + lambda I)^{-1} (P^T ybar + lambda vec(Z - U))`, `P = abar (I ⊗ S)`.
pub fn admm_update_r(model: &MeasurementModel, s: &Matrix, z: &Matrix, u: &Matrix, lambda: f64) -> Result<Matrix> {
    let p = right_factor_matrix(model.abar(), s)?;
    let rhs = p.transpose() * model.ybar() + vectorize(&(z - u)) * lambda;
    let solved = shifted_normal_solve(&p, lambda, rhs);
    mat(&solved, z.nrows(), z.ncols())
}

/// `Z+ = (mu S^T S + lambda I)^{-1} (mu S^T X_hat + lambda (R + U))`.
pub fn admm_update_z(s: &Matrix, x_hat: &Matrix, r: &Matrix, u: &Matrix, lambda: f64, mu: f64) -> Matrix {
    let rank = s.ncols();
    let lhs = s.transpose() * s * mu + Matrix::identity(rank, rank) * lambda;
    let rhs = s.transpose() * x_hat * mu + (r + u) * lambda;
    spd_solve(&lhs, &rhs)
}

/// `vec(L+) = (Q^T Q + lambda I)^{-1} (Q^T ybar + lambda vec(S - T))`, `Q = abar (Z^T ⊗ I)`.
pub fn admm_update_l(model: &MeasurementModel, z: &Matrix, s: &Matrix, t: &Matrix, lambda: f64) -> Result<Matrix> {
    let q = left_factor_matrix(model.abar(), z)?;
    let rhs = q.transpose() * model.ybar() + vectorize(&(s - t)) * lambda;
    let solved = shifted_normal_solve(&q, lambda, rhs);
    mat(&solved, s.nrows(), s.ncols())
}

/// `S+ = (mu X_hat Z^T + lambda (L + T)) (mu Z Z^T + lambda I)^{-1}`.
pub fn admm_update_s(x_hat: &Matrix, z: &Matrix, l: &Matrix, t: &Matrix, lambda: f64, mu: f64) -> Matrix {
    let rank = z.nrows();
    let gram = z * z.transpose() * mu + Matrix::identity(rank, rank) * lambda;
    let rhs = x_hat * z.transpose() * mu + (l + t) * lambda;
    // S G = rhs with G symmetric  <=>  G S^T = rhs^T
    spd_solve(&gram, &rhs.transpose()).transpose()
}

fn shifted_normal_solve(p: &Matrix, lambda: f64, rhs: Vector) -> Vector {
    let n = p.ncols();
    let lhs = p.transpose() * p + Matrix::identity(n, n) * lambda;
    let rhs = Matrix::from_column_slice(n, 1, rhs.as_slice());
    Vector::from_column_slice(spd_solve(&lhs, &rhs).as_slice())
}

/// Iterates of the alternating direction solver.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    /// Right factor, `r x n2`.
    pub r: Matrix,
    /// Split copy of `r`.
    pub z: Matrix,
    /// Scaled dual for `R = Z`.
    pub u: Matrix,
    /// Left factor, `n1 x r`.
    pub l: Matrix,
    /// Split copy of `l`.
    pub s: Matrix,
    /// Scaled dual for `L = S`.
    pub t: Matrix,
    /// Structured target, always a member of the structure family.
    pub x_hat: Matrix,
    pub iteration: usize,
}

impl AdmmState {
    /// Starting iterates.
    ///
    /// Banded structures start from one iteration of the alternating linear
    /// estimator; the identity structure starts from [`svd_init`].
    pub fn initialize(model: &MeasurementModel, rank: usize, structure: &LinearStructure, opts: &SolverOptions) -> Result<Self> {
        check_rank(model, rank)?;
        let (factors, x_hat) = if structure.is_identity() {
            let init = svd_init(model, rank)?;
            if init.degenerate {
                log::debug!("adls: zero spectral start");
            }
            let x_hat = init.factors.product();
            (init.factors, x_hat)
        } else {
            let h0 = ale::initial_param_fit(model, structure)?;
            let sh0 = structure.apply(&h0)?;
            let r_prev = balanced_factors(&sh0, rank)?.r;
            let (l, r) = ale::factor_step(&sh0, &r_prev, rank, opts.left_update)?;
            let x_hat = structure.project(&(&l * &r))?;
            (Factorization { l, r }, x_hat)
        };
        let (n1, n2) = (model.n1(), model.n2());
        Ok(Self {
            z: factors.r.clone(),
            s: factors.l.clone(),
            u: Matrix::zeros(rank, n2),
            t: Matrix::zeros(n1, rank),
            r: factors.r,
            l: factors.l,
            x_hat,
            iteration: 0,
        })
    }

    /// `S Z`, the current estimate.
    pub fn product(&self) -> Matrix {
        &self.s * &self.z
    }

    /// One outer iteration: right ADMM block, left ADMM block, structure refresh.
    pub fn step(&mut self, model: &MeasurementModel, structure: &LinearStructure, opts: &SolverOptions) -> Result<TraceEvent> {
        let (lambda, dual_step, mu) = (opts.lambda, opts.lambda_prime, opts.mu);
        let previous = self.product();

        for inner in 0..opts.inner_max {
            self.r = admm_update_r(model, &self.s, &self.z, &self.u, lambda)?;
            let z_prev = std::mem::replace(&mut self.z, admm_update_z(&self.s, &self.x_hat, &self.r, &self.u, lambda, mu));
            self.u += (&self.r - &self.z) * dual_step;
            if opts.inner_max > 1 && inner + 1 < opts.inner_max && inner_converged(&self.r, &self.z, &z_prev, opts) {
                break;
            }
        }
        for inner in 0..opts.inner_max {
            self.l = admm_update_l(model, &self.z, &self.s, &self.t, lambda)?;
            let s_prev = std::mem::replace(&mut self.s, admm_update_s(&self.x_hat, &self.z, &self.l, &self.t, lambda, mu));
            self.t += (&self.l - &self.s) * dual_step;
            if opts.inner_max > 1 && inner + 1 < opts.inner_max && inner_converged(&self.l, &self.s, &s_prev, opts) {
                break;
            }
        }

        let product = self.product();
        self.x_hat = structure.project(&product)?;
        self.iteration += 1;

        let stop_statistic = if structure.is_identity() {
            // the structure gap is identically zero here; use the iterate change and split residuals
            let change = max_abs(&(&product - &previous)) / max_abs(&product).max(1.0);
            change.max(max_abs(&(&self.r - &self.z))).max(max_abs(&(&self.l - &self.s)))
        } else {
            max_abs(&(&self.x_hat - &product))
        };
        Ok(TraceEvent {
            iteration: self.iteration,
            stage: Stage::Outer,
            objective: objective(model, &product),
            primal_right: (&self.r - &self.z).norm(),
            primal_left: (&self.l - &self.s).norm(),
            stop_statistic,
        })
    }
}

fn inner_converged(primal: &Matrix, split: &Matrix, split_prev: &Matrix, opts: &SolverOptions) -> bool {
    let primal_res = (primal - split).norm();
    let dual_res = opts.lambda * (split - split_prev).norm();
    primal_res <= opts.inner_tol_primal && dual_res <= opts.inner_tol_dual
}

/// Alternating direction least squares with the given structure
/// (use [`LinearStructure::unstructured`] for plain low-rank recovery).
pub fn adls_solve(model: &MeasurementModel, rank: usize, structure: &LinearStructure, opts: &SolverOptions) -> Result<Estimate> {
    adls_solve_traced(model, rank, structure, opts, &mut |_| {})
}

pub fn adls_solve_traced(
    model: &MeasurementModel,
    rank: usize,
    structure: &LinearStructure,
    opts: &SolverOptions,
    sink: TraceSink<'_>,
) -> Result<Estimate> {
    opts.validate()?;
    check_structure(model, structure)?;
    let mut state = AdmmState::initialize(model, rank, structure, opts)?;
    let start = state.product();
    sink(&TraceEvent {
        iteration: 0,
        stage: Stage::Init,
        objective: objective(model, &start),
        primal_right: 0.0,
        primal_left: 0.0,
        stop_statistic: f64::INFINITY,
    });
    let mut converged = false;
    while state.iteration < opts.k_max {
        let event = state.step(model, structure, opts)?;
        sink(&event);
        if !event.stop_statistic.is_finite() || !event.objective.is_finite() {
            log::warn!("adls: non-finite iterate at iteration {}", event.iteration);
            break;
        }
        if event.stop_statistic <= opts.epsilon {
            converged = true;
            break;
        }
    }
    let x_hat = state.product();
    Ok(Estimate {
        final_residual: model.residual_norm(&x_hat),
        x_hat,
        factorization: Factorization { l: state.s, r: state.z },
        iterations: state.iteration,
        converged,
    })
}

pub(crate) fn check_structure(model: &MeasurementModel, structure: &LinearStructure) -> Result<()> {
    if (structure.n1(), structure.n2()) != (model.n1(), model.n2()) {
        return crate::error::size_err(format!(
            "structure is {}x{}, model target is {}x{}",
            structure.n1(),
            structure.n2(),
            model.n1(),
            model.n2()
        ));
    }
    Ok(())
}
