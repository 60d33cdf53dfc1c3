//! Single-agent compositional baselines.

use nalgebra::DVector;
use rand::RngCore;

use super::state::{averaged_inner, corrected_inner, NetworkState};
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::rng::RngStreams;

fn guard(k: usize, vs: &[&DVector<f64>]) -> Result<()> {
    if vs.iter().any(|v| v.iter().any(|c| !c.is_finite() || c.abs() > super::state::DIVERGENCE_THRESHOLD)) {
        return Err(Error::Divergence { k, agent: 0 });
    }
    Ok(())
}

/// `z' = (1−β)z + βG(x; φ)`, `x' = x − α ∇G(x; φ)∇F(z'; ζ)` with one `φ`
/// shared by both lines. `k` only labels a divergence error.
pub fn scgd_step<P: Problem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    z: &DVector<f64>,
    alpha: f64,
    beta: f64,
    k: usize,
    rng: &mut dyn RngCore,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let (phi, zeta) = problem.draw_gradient(0, rng);
    let z_new = averaged_inner(z, &problem.inner_value(0, x, &phi), beta);
    let x_new = x - problem.gradient_product(0, x, &z_new, &phi, &zeta) * alpha;
    guard(k, &[&x_new, &z_new])?;
    Ok((x_new, z_new))
}

/// `z' = (1−β)(z + G(x; φ) − G(x_prev; φ)) + βG(x; φ)` with a common `φ`
/// drawn from `inner_rng`, then `x' = x − α ∇G(x; φ̃)∇F(z'; ζ)` with
/// `(φ̃, ζ)` drawn from `grad_rng`.
#[allow(clippy::too_many_arguments)]
pub fn scsc_step<P: Problem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    x_prev: &DVector<f64>,
    z: &DVector<f64>,
    alpha: f64,
    beta: f64,
    k: usize,
    inner_rng: &mut dyn RngCore,
    grad_rng: &mut dyn RngCore,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let (g_new, g_old) = problem.sample_inner_pair(0, x, x_prev, inner_rng);
    let z_new = corrected_inner(z, &g_new, &g_old, beta);
    let x_new = x - problem.sample_grad(0, x, &z_new, grad_rng) * alpha;
    guard(k, &[&x_new, &z_new])?;
    Ok((x_new, z_new))
}

/// Single-agent state in the same layout as the networked methods.
pub fn single_agent_init<P: Problem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    streams: &RngStreams,
) -> Result<NetworkState> {
    super::ab_dscsc::ab_dscsc_init(problem, std::slice::from_ref(x0), streams)
}

/// SCGD round `k → k+1` on a one-agent state. Both lines use the gradient
/// stream of round `k+1`.
pub fn scgd_round<P: Problem + ?Sized>(
    state: &mut NetworkState,
    problem: &P,
    alpha: f64,
    beta: f64,
    streams: &RngStreams,
) -> Result<()> {
    let round = state.k + 1;
    let (x, z) = scgd_step(problem, &state.x[0], &state.z[0], alpha, beta, round, &mut streams.gradient(0, round))?;
    state.x[0] = x;
    state.z[0] = z;
    state.k = round;
    Ok(())
}

/// SCSC round `k → k+1` on a one-agent state holding `(x_k, z_k, h_k)`:
/// `x_{k+1} = x_k − α_k h_k`, then the corrected inner update between
/// `x_{k+1}` and `x_k`, then `h_{k+1}` at `(x_{k+1}, z_{k+1})`.
///
/// This is the SCSC recursion with the gradient of step `k+1` evaluated as
/// soon as `z_{k+1}` is known; the draws use the inner and gradient streams
/// of round `k+1`.
pub fn scsc_round<P: Problem + ?Sized>(
    state: &mut NetworkState,
    problem: &P,
    alpha: f64,
    beta: f64,
    streams: &RngStreams,
) -> Result<()> {
    let round = state.k + 1;
    let x_new = &state.x[0] - &state.y[0] * alpha;
    let (g_new, g_old) = problem.sample_inner_pair(0, &x_new, &state.x[0], &mut streams.inner(0, round));
    state.z[0] = corrected_inner(&state.z[0], &g_new, &g_old, beta);
    let h = problem.sample_grad(0, &x_new, &state.z[0], &mut streams.gradient(0, round));
    state.x[0] = x_new;
    state.y[0] = h.clone();
    state.h_prev[0] = h;
    state.k = round;
    state.check_bounded()
}
