//! Reconstruction quality measures.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Upper bound on reported SRER, used when the error is numerically zero.
pub const SRER_CAP_DB: f64 = 300.0;

/// Converts an energy ratio to decibels, capped at [`SRER_CAP_DB`].
pub fn ratio_db(signal_energy: f64, error_energy: f64) -> f64 {
    if error_energy <= 0.0 {
        return SRER_CAP_DB;
    }
    (10.0 * (signal_energy / error_energy).log10()).min(SRER_CAP_DB)
}

/// Signal-to-reconstruction-error ratio `10 log10(||X||_F^2 / ||X - X_hat||_F^2)`.
pub fn srer_db(x: &Matrix, x_hat: &Matrix) -> Result<f64> {
    if x.shape() != x_hat.shape() {
        return Err(Error::Size(format!("{:?} vs {:?}", x.shape(), x_hat.shape())));
    }
    let signal = x.norm_squared();
    if signal == 0.0 {
        return Err(Error::Input("SRER of a zero matrix is undefined".into()));
    }
    Ok(ratio_db(signal, (x - x_hat).norm_squared()))
}
