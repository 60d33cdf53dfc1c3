//! Spectral radius of small dense matrices by repeated squaring.
//!
//! `ρ(M) = lim ‖M^m‖^{1/m}`. Squaring with renormalisation reaches
//! `m = 2^j` after `j` products, which converges for complex dominant pairs
//! and defective matrices alike, where a plain Rayleigh-quotient iteration
//! oscillates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Upper bound on the number of squarings (effective power `2^200`).
pub const MAX_SQUARINGS: usize = 200;
const REL_TOL: f64 = 1e-12;
const MIN_SQUARINGS: usize = 8;

pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    assert!(m.is_square(), "spectral radius of a non-square matrix");
    let norm = m.norm();
    if m.nrows() == 0 || norm == 0.0 {
        return Ok(0.0);
    }
    if !norm.is_finite() {
        return Err(Error::Numerical {
            message: "non-finite matrix entries".into(),
            last_estimate: f64::NAN,
        });
    }
    let mut p = m / norm;
    // log ‖M^power‖ with `power = 2^j`
    let mut log_norm = norm.ln();
    let mut power = 1.0_f64;
    let mut estimate = norm;
    for j in 1..=MAX_SQUARINGS {
        p = &p * &p;
        power *= 2.0;
        log_norm *= 2.0;
        let nrm = p.norm();
        if nrm == 0.0 {
            return Ok(0.0);
        }
        p /= nrm;
        log_norm += nrm.ln();
        let next = (log_norm / power).exp();
        if j >= MIN_SQUARINGS && (next - estimate).abs() <= REL_TOL * next.max(1e-300) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Numerical {
        message: format!("spectral radius did not converge in {MAX_SQUARINGS} squarings"),
        last_estimate: estimate,
    })
}

/// `(1/n) 1 uᵀ`, the rank-one limit of a row-stochastic matrix with left
/// Perron vector `u`.
pub fn row_centering(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len() as f64;
    DMatrix::from_fn(u.len(), u.len(), |_, j| u[j] / n)
}

/// `(1/n) v 1ᵀ`, the rank-one limit of a column-stochastic matrix with right
/// Perron vector `v`.
pub fn column_centering(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len() as f64;
    DMatrix::from_fn(v.len(), v.len(), |i, _| v[i] / n)
}

/// `ρ(M − centering)`. A value below one certifies geometric consensus.
pub fn contraction_factor(m: &DMatrix<f64>, centering: &DMatrix<f64>) -> Result<f64> {
    spectral_radius(&(m - centering))
}
