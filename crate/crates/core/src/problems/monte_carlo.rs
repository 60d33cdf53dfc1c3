//! Monte Carlo reference estimates of `g_i(x)` and `∇h(x)` built only from
//! the sampling oracle.

use nalgebra::DVector;
use rand::RngCore;

use super::Problem;
use crate::metrics::MeanVar;

/// Sample mean with per-coordinate standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: DVector<f64>,
    pub stderr: DVector<f64>,
}

impl MonteCarloEstimate {
    fn from_acc(acc: &MeanVar) -> Self {
        Self { mean: acc.mean().clone(), stderr: acc.stderr() }
    }

    /// Largest `|mean_k − target_k| / stderr_k`; coordinates with zero
    /// standard error count as infinite unless they match exactly.
    pub fn max_z_score(&self, target: &DVector<f64>) -> f64 {
        (0..self.mean.len())
            .map(|k| {
                let diff = (self.mean[k] - target[k]).abs();
                if self.stderr[k] > 0.0 {
                    diff / self.stderr[k]
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Mean of `draws` independent samples of `G_i(x; φ)`.
pub fn monte_carlo_inner<P: Problem + ?Sized>(
    problem: &P,
    agent: usize,
    x: &DVector<f64>,
    draws: usize,
    rng: &mut dyn RngCore,
) -> MonteCarloEstimate {
    let mut acc = MeanVar::new(problem.inner_dim(agent));
    for _ in 0..draws.max(1) {
        let phi = problem.draw_inner(agent, rng);
        acc.push(&problem.inner_value(agent, x, &phi));
    }
    MonteCarloEstimate::from_acc(&acc)
}

/// Each of the `draws` outer samples averages `∇G_i(x; φ)∇F_i(ẑ_i; ζ)` over
/// agents, where `ẑ_i` is itself a fresh mean of `inner_draws` inner samples.
pub fn monte_carlo_grad_h<P: Problem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    draws: usize,
    inner_draws: usize,
    rng: &mut dyn RngCore,
) -> MonteCarloEstimate {
    let n = problem.agents();
    let mut acc = MeanVar::new(problem.dim());
    for _ in 0..draws.max(1) {
        let mut total = DVector::zeros(problem.dim());
        for i in 0..n {
            let z = monte_carlo_inner(problem, i, x, inner_draws, rng).mean;
            total += problem.sample_grad(i, x, &z, rng);
        }
        acc.push(&(total / n as f64));
    }
    MonteCarloEstimate::from_acc(&acc)
}
