//! Distributed compositional SGD baselines on a symmetric doubly stochastic
//! mixing matrix, with and without gradient tracking.

use nalgebra::DVector;

use super::state::{averaged_inner, NetworkState};
use crate::error::Result;
use crate::linalg::{mix, SparseRows};
use crate::problems::Problem;
use crate::rng::RngStreams;

/// Step sizes `η`, `γ` of the distributed SGD baselines; `β_k` comes from
/// the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DscgdParams {
    pub eta: f64,
    pub gamma: f64,
}

impl Default for DscgdParams {
    fn default() -> Self {
        Self { eta: 0.03, gamma: 3.0 }
    }
}

/// One round for every agent:
/// `z⁺ = (1−γβ)z + γβ G(x; φ)`,
/// `x̃ = Σ_j w_ij x_j − η d`, `x⁺ = x + β(x̃ − x)`,
/// where `d` is the local gradient `∇G(x; φ)∇F(z⁺; ζ)` or, with `tracking`,
/// the tracker `y⁺ = Σ_j w_ij y_j + d⁺ − d` built from it. The local gradient
/// shares `φ` with the inner update.
#[allow(clippy::too_many_arguments)]
pub fn dscgd_step<P: Problem + ?Sized>(
    state: &mut NetworkState,
    problem: &P,
    w: &SparseRows,
    params: DscgdParams,
    beta: f64,
    tracking: bool,
    streams: &RngStreams,
) -> Result<()> {
    let n = state.agents();
    let round = state.k + 1;
    let weight = params.gamma * beta;
    let mut local = Vec::with_capacity(n);
    for i in 0..n {
        let (phi, zeta) = problem.draw_gradient(i, &mut streams.gradient(i, round));
        state.z[i] = averaged_inner(&state.z[i], &problem.inner_value(i, &state.x[i], &phi), weight);
        local.push(problem.gradient_product(i, &state.x[i], &state.z[i], &phi, &zeta));
    }
    let direction: Vec<DVector<f64>> = if tracking {
        let y_mixed = mix(w, &state.y);
        (0..n).map(|i| (&y_mixed[i] - &state.h_prev[i]) + &local[i]).collect()
    } else {
        local.clone()
    };
    let x_mixed = mix(w, &state.x);
    for i in 0..n {
        let x_tilde = &x_mixed[i] - &direction[i] * params.eta;
        state.x[i] = &state.x[i] + (x_tilde - &state.x[i]) * beta;
    }
    state.y = direction;
    state.h_prev = local;
    state.k = round;
    state.check_bounded()
}

/// GP-DSCGD round.
pub fn gp_dscgd_step<P: Problem + ?Sized>(
    state: &mut NetworkState,
    problem: &P,
    w: &SparseRows,
    params: DscgdParams,
    beta: f64,
    streams: &RngStreams,
) -> Result<()> {
    dscgd_step(state, problem, w, params, beta, false, streams)
}

/// GT-DSCGD round.
pub fn gt_dscgd_step<P: Problem + ?Sized>(
    state: &mut NetworkState,
    problem: &P,
    w: &SparseRows,
    params: DscgdParams,
    beta: f64,
    streams: &RngStreams,
) -> Result<()> {
    dscgd_step(state, problem, w, params, beta, true, streams)
}
