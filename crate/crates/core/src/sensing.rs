//! Linear measurement model `y = A vec(X) + e` and noise prewhitening.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{size_err, Error, Result};
use crate::linalg::{check_finite, vectorize, Matrix, Vector};

/// Prewhitened sensing matrix and measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    abar: Matrix,
    ybar: Vector,
    n1: usize,
    n2: usize,
}

impl MeasurementModel {
    /// Wraps an already-whitened operator and measurement vector.
    pub fn new(abar: Matrix, ybar: Vector, n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return size_err(format!("empty target shape {n1}x{n2}"));
        }
        if abar.ncols() != n1 * n2 {
            return size_err(format!(
                "operator has {} columns, target has {} entries",
                abar.ncols(),
                n1 * n2
            ));
        }
        if abar.nrows() == 0 || abar.nrows() != ybar.len() {
            return size_err(format!(
                "operator has {} rows, measurements have length {}",
                abar.nrows(),
                ybar.len()
            ));
        }
        check_finite(abar.as_slice())?;
        check_finite(ybar.as_slice())?;
        Ok(Self { abar, ybar, n1, n2 })
    }

    pub fn abar(&self) -> &Matrix {
        &self.abar
    }

    pub fn ybar(&self) -> &Vector {
        &self.ybar
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.ybar.len()
    }

    /// `||ybar - abar vec(X)||_2`.
    pub fn residual_norm(&self, x: &Matrix) -> f64 {
        (&self.ybar - &self.abar * vectorize(x)).norm()
    }
}

/// Noise covariance of the raw measurements.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    /// `sigma^2 I`.
    Isotropic { sigma: f64 },
    /// Dense symmetric positive definite `m x m` covariance.
    Covariance(Matrix),
}

/// `m x n1*n2` operator with i.i.d. `N(0, 1/m)` entries, deterministic per seed.
pub fn make_gaussian_operator(m: usize, n1: usize, n2: usize, seed: u64) -> Matrix {
    assert!(m >= 1, "at least one measurement is required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let n = n1 * n2;
    let entries: Vec<f64> = (0..m * n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect();
    Matrix::from_column_slice(m, n, &entries)
}

/// `A vec(X)`.
pub fn apply_operator(a: &Matrix, x: &Matrix) -> Result<Vector> {
    if a.ncols() != x.len() {
        return size_err(format!(
            "operator has {} columns, matrix has {} entries",
            a.ncols(),
            x.len()
        ));
    }
    Ok(a * vectorize(x))
}

/// Inverse symmetric square root `C^{-1/2}` from the eigendecomposition.
pub fn inverse_sqrt(cov: &Matrix) -> Result<Matrix> {
    let (m, k) = cov.shape();
    if m != k {
        return Err(Error::Covariance(format!("{m}x{k} is not square")));
    }
    let scale = crate::linalg::max_abs(cov).max(f64::MIN_POSITIVE);
    let asym = crate::linalg::max_abs(&(cov - cov.transpose()));
    if asym > 1e-12 * scale {
        return Err(Error::Covariance(format!("asymmetry {asym:e}")));
    }
    let eig = cov.clone().symmetric_eigen();
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::Covariance(format!("eigenvalue {bad:e}")));
    }
    let d = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    Ok(v * Matrix::from_diagonal(&d) * v.transpose())
}

/// Whitens `(A, y)` so that ordinary least squares equals `C^{-1}`-weighted least squares.
pub fn prewhiten(a: &Matrix, y: &Vector, noise: &NoiseSpec, n1: usize, n2: usize) -> Result<MeasurementModel> {
    if a.nrows() != y.len() {
        return size_err(format!("operator has {} rows, y has length {}", a.nrows(), y.len()));
    }
    match noise {
        NoiseSpec::Isotropic { sigma } => {
            if !(*sigma > 0.0) || !sigma.is_finite() {
                return Err(Error::Covariance(format!("isotropic sigma {sigma}")));
            }
            MeasurementModel::new(a / *sigma, y / *sigma, n1, n2)
        }
        NoiseSpec::Covariance(c) => {
            if c.nrows() != y.len() {
                return size_err(format!("covariance is {}x{}, y has length {}", c.nrows(), c.ncols(), y.len()));
            }
            let w = inverse_sqrt(c)?;
            MeasurementModel::new(&w * a, &w * y, n1, n2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn operator_is_deterministic() {
        assert_eq!(make_gaussian_operator(5, 2, 3, 42), make_gaussian_operator(5, 2, 3, 42));
        assert_ne!(make_gaussian_operator(5, 2, 3, 42), make_gaussian_operator(5, 2, 3, 43));
    }

    #[test]
    fn operator_entry_statistics() {
        let (m, n) = (50, 100);
        let a = make_gaussian_operator(m, 10, 10, 1);
        let mean = a.sum() / (m * n) as f64;
        let sd = (1.0 / m as f64).sqrt();
        assert!(mean.abs() <= 4.0 * sd / ((m * n) as f64).sqrt());
        let a = make_gaussian_operator(100, 10, 10, 2);
        let avg_col: f64 = a.column_iter().map(|c| c.norm_squared()).sum::<f64>() / 100.0;
        assert!((0.8..=1.2).contains(&avg_col), "{avg_col}");
    }

    #[test]
    fn apply_operator_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(2, 2, &mut rng);
        assert_eq!(apply_operator(&Matrix::identity(4, 4), &x).unwrap(), vectorize(&x));
        let a = Matrix::from_row_slice(2, 4, &[1.0, 2.0, 3.0, 4.0, 0.0, -1.0, 0.5, 2.0]);
        let x = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        // vec(X) = [1, 3, 2, 4]
        let y = apply_operator(&a, &x).unwrap();
        assert_eq!(y.as_slice(), &[1.0 + 6.0 + 6.0 + 16.0, 0.0 - 3.0 + 1.0 + 8.0]);
        let x1 = random(2, 2, &mut rng);
        let x2 = random(2, 2, &mut rng);
        let lhs = apply_operator(&a, &(&x1 + &x2)).unwrap();
        let rhs = apply_operator(&a, &x1).unwrap() + apply_operator(&a, &x2).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(apply_operator(&a, &Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn prewhiten_identity_and_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(3, 4, &mut rng);
        let y = Vector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let m = prewhiten(&a, &y, &NoiseSpec::Covariance(Matrix::identity(3, 3)), 2, 2).unwrap();
        assert!((m.abar() - &a).norm() < 1e-15 && (m.ybar() - &y).norm() < 1e-15);
        let m = prewhiten(&a, &y, &NoiseSpec::Covariance(Matrix::identity(3, 3) * 4.0), 2, 2).unwrap();
        assert!((m.abar() - &a / 2.0).norm() < 1e-15 && (m.ybar() - &y / 2.0).norm() < 1e-15);
        let m = prewhiten(&a, &y, &NoiseSpec::Isotropic { sigma: 2.0 }, 2, 2).unwrap();
        assert!((m.abar() - &a / 2.0).norm() < 1e-15);
    }

    #[test]
    fn prewhiten_preserves_weighted_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = random(4, 4, &mut rng);
            let c = g.transpose() * &g + Matrix::identity(4, 4) * 0.5;
            let a = random(4, 6, &mut rng);
            let y = Vector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
            let x = random(2, 3, &mut rng);
            let model = prewhiten(&a, &y, &NoiseSpec::Covariance(c.clone()), 2, 3).unwrap();
            let raw = &y - &a * vectorize(&x);
            let weighted = (raw.transpose() * c.try_inverse().unwrap() * &raw)[0];
            let whitened = model.residual_norm(&x).powi(2);
            assert!((weighted - whitened).abs() <= 1e-10 * weighted.max(1.0));
        }
    }

    #[test]
    fn prewhiten_rejects_bad_covariance() {
        let a = Matrix::zeros(2, 4);
        let y = Vector::zeros(2);
        let not_spd = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(prewhiten(&a, &y, &NoiseSpec::Covariance(not_spd), 2, 2), Err(Error::Covariance(_))));
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(prewhiten(&a, &y, &NoiseSpec::Covariance(asym), 2, 2), Err(Error::Covariance(_))));
        assert!(prewhiten(&a, &y, &NoiseSpec::Isotropic { sigma: 0.0 }, 2, 2).is_err());
    }

    #[test]
    fn model_validates_shapes() {
        assert!(MeasurementModel::new(Matrix::zeros(3, 4), Vector::zeros(3), 2, 2).is_ok());
        assert!(MeasurementModel::new(Matrix::zeros(3, 5), Vector::zeros(3), 2, 2).is_err());
        assert!(MeasurementModel::new(Matrix::zeros(3, 4), Vector::zeros(2), 2, 2).is_err());
    }
}
