//! Per-iteration diagnostics and the statistics used to read rates off them.

mod stats;

use nalgebra::DVector;

pub use stats::{bounded_ratio, fit_rate_slope, geometric_sum_check, MeanVar, RateFit, RatioCheck, MIN_FIT_POINTS};

use crate::error::{Error, Result};
use crate::problems::Problem;

/// Column names, in CSV order.
pub const COLUMNS: [&str; 8] =
    ["k", "alpha_k", "beta_k", "consensus_err", "tracking_err", "grad_norm_sq", "opt_gap_avg", "residual_avg"];

/// Diagnostics at iteration `k`. Quantities needing ground truth the problem
/// does not have are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub k: usize,
    pub alpha_k: f64,
    pub beta_k: f64,
    pub consensus_err: f64,
    pub tracking_err: Option<f64>,
    pub grad_norm_sq: Option<f64>,
    pub opt_gap_avg: Option<f64>,
    pub residual_avg: Option<f64>,
}

impl MetricRow {
    /// Value by column name; `k` is returned as a float.
    pub fn get(&self, column: &str) -> Option<f64> {
        match column {
            "k" => Some(self.k as f64),
            "alpha_k" => Some(self.alpha_k),
            "beta_k" => Some(self.beta_k),
            "consensus_err" => Some(self.consensus_err),
            "tracking_err" => self.tracking_err,
            "grad_norm_sq" => self.grad_norm_sq,
            "opt_gap_avg" => self.opt_gap_avg,
            "residual_avg" => self.residual_avg,
            _ => None,
        }
    }
}

/// `x̄ = (1/n) Σ_i u_i x_i`.
pub fn weighted_average(x: &[DVector<f64>], u: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut avg = DVector::zeros(x[0].len());
    for (xi, &ui) in x.iter().zip(u.iter()) {
        avg.axpy(ui / n as f64, xi, 1.0);
    }
    avg
}

/// `Σ_i ‖x_i − x̄‖²` with `x̄` the `u`-weighted average.
pub fn consensus_error(x: &[DVector<f64>], u: &DVector<f64>) -> f64 {
    let avg = weighted_average(x, u);
    x.iter().map(|xi| (xi - &avg).norm_squared()).sum()
}

/// `Σ_i ‖z_i − g_i(x_i)‖²`.
pub fn tracking_error<P: Problem + ?Sized>(z: &[DVector<f64>], x: &[DVector<f64>], problem: &P) -> Result<f64> {
    let mut total = 0.0;
    for (i, (zi, xi)) in z.iter().zip(x).enumerate() {
        let g = problem.true_inner(i, xi).ok_or(Error::Capability("tracking error needs the true inner map"))?;
        total += (zi - g).norm_squared();
    }
    Ok(total)
}

/// All diagnostics for per-agent iterates `x` and inner trackers `z`.
pub fn metric_row<P: Problem + ?Sized>(
    k: usize,
    alpha_k: f64,
    beta_k: f64,
    x: &[DVector<f64>],
    z: &[DVector<f64>],
    u: &DVector<f64>,
    problem: &P,
) -> MetricRow {
    let n = x.len() as f64;
    let avg = weighted_average(x, u);
    let optimum = problem.optimum();
    let h_star = problem.optimal_value();
    let residual = h_star.and_then(|hs| {
        x.iter().map(|xi| problem.objective(xi).map(|h| h - hs)).sum::<Option<f64>>().map(|s| s / n)
    });
    MetricRow {
        k,
        alpha_k,
        beta_k,
        consensus_err: consensus_error(x, u),
        tracking_err: tracking_error(z, x, problem).ok(),
        grad_norm_sq: problem.true_grad(&avg).map(|g| g.norm_squared()),
        opt_gap_avg: optimum.map(|xs| x.iter().map(|xi| (xi - xs).norm_squared()).sum::<f64>() / n),
        residual_avg: residual,
    }
}
