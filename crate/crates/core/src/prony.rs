//! Classic Prony fit of a sum of damped exponentials `x_t = sum_i c_i z_i^t`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{pinv_solve, Matrix, Vector};

/// Poles closer than this (relative to the largest modulus) are flagged.
const SEPARATION_RTOL: f64 = 1e-6;

/// A real signal written as a sum of exponentials with conjugate-closed poles
/// and amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialModel {
    pub poles: Vec<Complex64>,
    pub amplitudes: Vec<Complex64>,
    /// Set when two poles nearly coincide.
    pub ill_conditioned: bool,
}

impl ExponentialModel {
    pub fn order(&self) -> usize {
        self.poles.len()
    }

    /// Complex samples `x_0 .. x_{len-1}`.
    pub fn evaluate(&self, len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (z, c) in self.poles.iter().zip(&self.amplitudes) {
            let mut term = *c;
            for v in out.iter_mut() {
                *v += term;
                term *= z;
            }
        }
        out
    }

    /// Real part of [`evaluate`](Self::evaluate).
    pub fn synthesize(&self, len: usize) -> Vector {
        Vector::from_iterator(len, self.evaluate(len).into_iter().map(|v| v.re))
    }
}

/// Fits an order-`r` exponential model to `x` by linear prediction, polynomial
/// rooting and a Vandermonde least-squares fit of the amplitudes.
pub fn prony_fit(x: &Vector, r: usize) -> Result<ExponentialModel> {
    if r == 0 {
        return Err(Error::Input("prony order must be at least 1".into()));
    }
    let n = x.len();
    if n < 2 * r + 1 {
        return Err(Error::Input(format!("prony order {r} needs at least {} samples, got {n}", 2 * r + 1)));
    }
    // x_t + a_1 x_{t-1} + ... + a_r x_{t-r} = 0,  t = r .. n-1
    let rows = n - r;
    let design = Matrix::from_fn(rows, r, |i, k| x[r + i - 1 - k]);
    let target = Vector::from_fn(rows, |i, _| -x[r + i]);
    let coeffs = pinv_solve(&design, &target)?;

    let poles = polynomial_roots(coeffs.as_slice());
    let amplitudes = fit_amplitudes(x, &poles)?;
    let ill_conditioned = min_separation(&poles) <= SEPARATION_RTOL * max_modulus(&poles).max(1.0);
    if ill_conditioned {
        log::debug!("prony: near-coincident poles {poles:?}");
    }
    Ok(ExponentialModel { poles, amplitudes, ill_conditioned })
}

/// Least-squares amplitudes for fixed poles, conjugate-symmetrized.
pub fn fit_amplitudes(x: &Vector, poles: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    let r = poles.len();
    let mut vander = DMatrix::<Complex64>::zeros(n, r);
    for (k, z) in poles.iter().enumerate() {
        let mut p = Complex64::new(1.0, 0.0);
        for t in 0..n {
            vander[(t, k)] = p;
            p *= z;
        }
    }
    let rhs = DVector::<Complex64>::from_iterator(n, x.iter().map(|&v| Complex64::new(v, 0.0)));
    let svd = vander.svd(true, true);
    let eps = svd.singular_values.max() * (n.max(r) as f64) * 1e-14;
    let c = svd.solve(&rhs, eps).map_err(|e| Error::Input(format!("vandermonde solve: {e}")))?;
    let mut amps: Vec<Complex64> = c.iter().copied().collect();
    for (k, z) in poles.iter().enumerate() {
        if z.im == 0.0 {
            amps[k].im = 0.0;
        } else if z.im > 0.0 {
            if let Some(j) = poles.iter().position(|w| *w == z.conj()) {
                let avg = (amps[k] + amps[j].conj()) * 0.5;
                amps[k] = avg;
                amps[j] = avg.conj();
            }
        }
    }
    Ok(amps)
}

/// Roots of `z^r + a_1 z^{r-1} + ... + a_r`: companion eigenvalues, Newton-polished,
/// with real roots snapped to the real axis and complex roots paired exactly.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let r = coeffs.len();
    let mut companion = Matrix::zeros(r, r);
    for k in 0..r {
        companion[(0, k)] = -coeffs[k];
    }
    for i in 1..r {
        companion[(i, i - 1)] = 1.0;
    }
    let raw = companion.complex_eigenvalues();
    let mut roots: Vec<Complex64> = raw.iter().map(|z| newton_polish(coeffs, Complex64::new(z.re, z.im))).collect();

    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for z in roots.iter_mut() {
        if z.im.abs() <= 1e-10 * scale {
            z.im = 0.0;
            *z = newton_polish(coeffs, *z);
            z.im = 0.0;
        }
    }
    // pair each upper-half-plane root with its nearest lower-half-plane partner
    let mut used = vec![false; r];
    for k in 0..r {
        if roots[k].im <= 0.0 || used[k] {
            continue;
        }
        let partner = (0..r)
            .filter(|&j| !used[j] && j != k && roots[j].im < 0.0)
            .min_by(|&a, &b| (roots[a] - roots[k].conj()).norm().total_cmp(&(roots[b] - roots[k].conj()).norm()));
        if let Some(j) = partner {
            roots[j] = roots[k].conj();
            used[j] = true;
            used[k] = true;
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    roots
}

fn newton_polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        // Horner for p and p'
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in coeffs {
            dp = dp * z + p;
            p = p * z + a;
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        z = next;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

fn min_separation(poles: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            best = best.min((poles[i] - poles[j]).norm());
        }
    }
    best
}

fn max_modulus(poles: &[Complex64]) -> f64 {
    poles.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
