//! Random test problems: low-rank Hankel targets built from a Prony fit,
//! unstructured low-rank targets, and measurement noise at a set SMNR.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::prony::{fit_amplitudes, prony_fit, ExponentialModel};
use crate::seed::derive_seed;
use crate::structure::LinearStructure;

/// Fresh draws tried before giving up on a Hankel target.
pub const MAX_GENERATION_ATTEMPTS: usize = 32;

/// Generated targets must satisfy `sigma_{r+1} <= RANK_GAP_RTOL * sigma_1`.
const RANK_GAP_RTOL: f64 = 1e-8;
/// ... and `sigma_r >= MIN_SIGMA_RTOL * sigma_1`.
const MIN_SIGMA_RTOL: f64 = 1e-6;

fn normal_draws(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Reflects poles outside the unit circle to modulus `1/|z|`.
fn stabilize(model: &mut ExponentialModel) -> bool {
    let mut changed = false;
    for z in model.poles.iter_mut() {
        let m = z.norm();
        if m > 1.0 {
            *z = Complex64::from_polar(1.0 / m, z.arg());
            if z.im.abs() < 1e-300 {
                z.im = 0.0;
            }
            changed = true;
        }
    }
    changed
}

/// Singular values in nonincreasing order.
fn sorted_singular_values(x: &Matrix) -> Vec<f64> {
    let mut sv: Vec<f64> = x.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn has_exact_rank(x: &Matrix, r: usize) -> bool {
    let sv = sorted_singular_values(x);
    let top = sv[0];
    if !(top > 0.0) || !top.is_finite() {
        return false;
    }
    let tail_ok = sv.get(r).is_none_or(|&s| s <= RANK_GAP_RTOL * top);
    tail_ok && sv[r - 1] >= MIN_SIGMA_RTOL * top
}

/// Rank-`r` Hankel target `X = S(h)` with `h` the order-`r` Prony model of an
/// i.i.d. `N(0, 1)` sequence of length `n1 + n2 - 1`.
pub fn gen_hankel_lowrank(n1: usize, n2: usize, r: usize, seed: u64) -> Result<(Matrix, Vector)> {
    let max = n1.min(n2);
    if r == 0 || r > max {
        return Err(Error::Rank { rank: r, max });
    }
    let structure = LinearStructure::hankel(n1, n2);
    let p = structure.p();
    if p < 2 * r + 1 {
        return Err(Error::Input(format!("a length-{p} sequence cannot carry an order-{r} Prony model")));
    }
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[attempt as u64]));
        let draw = Vector::from_vec(normal_draws(p, &mut rng));
        let mut model = match prony_fit(&draw, r) {
            Ok(m) if !m.ill_conditioned => m,
            _ => continue,
        };
        if stabilize(&mut model) {
            model.amplitudes = fit_amplitudes(&draw, &model.poles)?;
        }
        let h = model.synthesize(p);
        if h.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let x = structure.apply(&h)?;
        if has_exact_rank(&x, r) {
            return Ok((x, h));
        }
        log::debug!("probgen: attempt {attempt} did not give an exact rank-{r} target");
    }
    Err(Error::Generation(MAX_GENERATION_ATTEMPTS))
}

/// `X = G1 G2` with i.i.d. `N(0, 1)` factors.
pub fn gen_lowrank(n1: usize, n2: usize, r: usize, seed: u64) -> Result<Matrix> {
    let max = n1.min(n2);
    if r == 0 || r > max {
        return Err(Error::Rank { rank: r, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g1 = Matrix::from_column_slice(n1, r, &normal_draws(n1 * r, &mut rng));
    let g2 = Matrix::from_column_slice(r, n2, &normal_draws(r * n2, &mut rng));
    Ok(g1 * g2)
}

/// Noise level giving `||X||_F^2 / (m sigma^2) = 10^(smnr_db / 10)`.
pub fn noise_sigma(x: &Matrix, m: usize, smnr_db: f64) -> f64 {
    if smnr_db == f64::INFINITY {
        return 0.0;
    }
    (x.norm_squared() / (m as f64 * 10f64.powf(smnr_db / 10.0))).sqrt()
}

/// Adds i.i.d. `N(0, sigma^2)` noise calibrated to the realization's `||X||_F`.
/// `smnr_db = +inf` adds nothing.
pub fn add_noise(y: &Vector, x: &Matrix, smnr_db: f64, seed: u64) -> Result<(Vector, f64)> {
    if smnr_db.is_nan() || smnr_db == f64::NEG_INFINITY {
        return Err(Error::Input(format!("smnr_db {smnr_db}")));
    }
    let sigma = noise_sigma(x, y.len(), smnr_db);
    if sigma == 0.0 {
        return Ok((y.clone(), 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = Vector::from_vec(normal_draws(y.len(), &mut rng)) * sigma;
    Ok((y + e, sigma))
}
