//! Dense real linear algebra used by every solver.
//!
//! Matrices are nalgebra `DMatrix<f64>`, which stores entries column-major, so
//! `vectorize` is a copy of the backing storage. The Kronecker-structured
//! operators of the bilinear measurement model are only exposed through
//! [`right_factor_matrix`] and [`left_factor_matrix`]; callers never need to
//! know the index order of the underlying Kronecker products.

use nalgebra::{DMatrix, DVector};

use crate::error::{size_err, Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative singular-value cutoff for pseudoinverses and numerical rank.
pub const PINV_RTOL: f64 = 1e-12;

/// Builds a matrix from column-major entries, rejecting NaN/Inf.
pub fn matrix_from_col_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return size_err(format!("empty shape {rows}x{cols}"));
    }
    if entries.len() != rows * cols {
        return size_err(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        ));
    }
    check_finite(entries)?;
    Ok(Matrix::from_column_slice(rows, cols, entries))
}

pub fn check_finite(entries: &[f64]) -> Result<()> {
    match entries.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Stacks the columns of `x` into one vector.
pub fn vectorize(x: &Matrix) -> Vector {
    Vector::from_column_slice(x.as_slice())
}

/// Inverse of [`vectorize`]: reshapes `v` into an `n1 x n2` matrix.
pub fn mat(v: &Vector, n1: usize, n2: usize) -> Result<Matrix> {
    if v.len() != n1 * n2 {
        return size_err(format!("vector of length {} into {n1}x{n2}", v.len()));
    }
    Ok(Matrix::from_column_slice(n1, n2, v.as_slice()))
}

/// Singular values at or below this are treated as zero.
fn cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * sigma_max * PINV_RTOL
}

/// Moore-Penrose pseudoinverse via the SVD.
pub fn pinv(a: &Matrix) -> Matrix {
    let (rows, cols) = a.shape();
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let vt = svd.v_t.as_ref().expect("svd computed with v_t");
    let smax = svd.singular_values.max();
    let tol = cutoff(rows, cols, smax);
    let mut out = Matrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 0.0 {
            // out += v_k * u_k^T / s
            out.ger(1.0 / s, &vt.row(k).transpose(), &u.column(k), 1.0);
        }
    }
    out
}

/// Minimum-norm least-squares solution `A^+ b`.
pub fn pinv_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    if a.nrows() != b.len() {
        return size_err(format!(
            "pinv_solve: {} rows against rhs of length {}",
            a.nrows(),
            b.len()
        ));
    }
    let (rows, cols) = a.shape();
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let vt = svd.v_t.as_ref().expect("svd computed with v_t");
    let tol = cutoff(rows, cols, svd.singular_values.max());
    let mut x = Vector::zeros(cols);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 0.0 {
            let coef = u.column(k).dot(b) / s;
            x.axpy(coef, &vt.row(k).transpose(), 1.0);
        }
    }
    Ok(x)
}

/// Number of singular values above the pseudoinverse cutoff.
pub fn numerical_rank(a: &Matrix) -> usize {
    let (rows, cols) = a.shape();
    let sv = a.clone().singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    let tol = cutoff(rows, cols, smax);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Rank-`r` truncated SVD.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// `rows x r`, orthonormal columns.
    pub u: Matrix,
    /// Length `r`, nonincreasing.
    pub sigma: Vector,
    /// `cols x r`, orthonormal columns.
    pub v: Matrix,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (k, s) in self.sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

pub fn truncated_svd(x: &Matrix, r: usize) -> Result<TruncatedSvd> {
    let max = x.nrows().min(x.ncols());
    if r == 0 || r > max {
        return Err(Error::Rank { rank: r, max });
    }
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let vt = svd.v_t.expect("svd computed with v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let keep = &order[..r];
    let u_r = Matrix::from_fn(x.nrows(), r, |i, k| u[(i, keep[k])]);
    let v_r = Matrix::from_fn(x.ncols(), r, |j, k| vt[(keep[k], j)]);
    let sigma = Vector::from_fn(r, |k, _| svd.singular_values[keep[k]].max(0.0));
    Ok(TruncatedSvd {
        u: u_r,
        sigma,
        v: v_r,
    })
}

/// Returns `M` (`m x r*n2`) with `M vec(R) = abar vec(L R)` for every `r x n2` R.
pub fn right_factor_matrix(abar: &Matrix, l: &Matrix) -> Result<Matrix> {
    let (n1, r) = l.shape();
    let cols = abar.ncols();
    if n1 == 0 || !cols.is_multiple_of(n1) {
        return size_err(format!(
            "right_factor_matrix: {cols} operator columns with a left factor of {n1} rows"
        ));
    }
    let n2 = cols / n1;
    let m = abar.nrows();
    let mut out = Matrix::zeros(m, r * n2);
    for j in 0..n2 {
        let block = abar.columns(j * n1, n1) * l;
        out.columns_mut(j * r, r).copy_from(&block);
    }
    Ok(out)
}

/// Returns `N` (`m x n1*r`) with `N vec(L) = abar vec(L R)` for every `n1 x r` L.
pub fn left_factor_matrix(abar: &Matrix, rf: &Matrix) -> Result<Matrix> {
    let (r, n2) = rf.shape();
    let cols = abar.ncols();
    if n2 == 0 || !cols.is_multiple_of(n2) {
        return size_err(format!(
            "left_factor_matrix: {cols} operator columns with a right factor of {n2} columns"
        ));
    }
    let n1 = cols / n2;
    let m = abar.nrows();
    let mut out = Matrix::zeros(m, n1 * r);
    for k in 0..r {
        let mut block = out.columns_mut(k * n1, n1);
        for j in 0..n2 {
            let w = rf[(k, j)];
            if w != 0.0 {
                block += abar.columns(j * n1, n1) * w;
            }
        }
    }
    Ok(out)
}

/// Solves `a x = b` for symmetric positive definite `a` (any number of rhs columns).
///
/// Falls back to the pseudoinverse if the Cholesky factorization breaks down.
pub fn spd_solve(a: &Matrix, b: &Matrix) -> Matrix {
    match a.clone().cholesky() {
        Some(ch) => ch.solve(b),
        None => {
            log::warn!("cholesky failed on a {}x{} system; using pseudoinverse", a.nrows(), a.ncols());
            pinv(a) * b
        }
    }
}

/// Largest absolute entry.
pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
