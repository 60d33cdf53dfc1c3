//! Sampling oracles for distributed compositional objectives.
//!
//! Agent `i` owns `f_i(g_i(x))` with `g_i(x) = E[G_i(x; φ)]` and
//! `f_i(z) = E[F_i(z; ζ)]`. Algorithms only see the oracle through
//! [`Problem`]: inner samples, the product `∇G_i(x; φ) ∇F_i(z; ζ)`, and
//! optional ground truth used by metrics and tests.

mod centralized;
mod logistic;
mod mlp;
mod monte_carlo;
mod quadratic;
mod sigmoid;
mod sinusoid;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

pub use centralized::Centralized;
pub use logistic::{make_logistic_cso, LogisticParams, LogisticProblem};
pub use mlp::Mlp;
pub use monte_carlo::{monte_carlo_grad_h, monte_carlo_inner, MonteCarloEstimate};
pub use quadratic::{make_quadratic, QuadraticParams, QuadraticProblem};
pub use sigmoid::{make_sigmoid_least_squares, SigmoidParams, SigmoidProblem};
pub use sinusoid::{make_sinusoid_maml, MamlParams, MamlSample, SinusoidMaml, SinusoidTask};

/// Which pieces of ground truth an oracle can supply.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Capabilities {
    pub true_g: bool,
    pub true_grad: bool,
    pub optimum: bool,
    pub normality: bool,
}

/// Closed-form ingredients of the limiting covariance of the averaged
/// iterates, all evaluated at the optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityData {
    /// `n ∇²h(x*)`, `d × d`.
    pub h: DMatrix<f64>,
    /// Per-agent outer curvature `T_j`, `p_j × p_j`.
    pub t: Vec<DMatrix<f64>>,
    /// Per-agent inner Jacobian `∇g_j(x*)`, `d × p_j`.
    pub inner_jacobian: Vec<DMatrix<f64>>,
    /// Covariance of the summed outer-gradient noise at `(x*, g(x*))`.
    pub s1: DMatrix<f64>,
    /// Covariance of `Σ_j ∇g_j(x*) T_j G_j(x*; φ_j)`.
    pub s2: DMatrix<f64>,
}

/// A distributed stochastic compositional problem.
///
/// Sampling takes the caller's RNG; oracles are immutable once built.
pub trait Problem: Send + Sync {
    /// Inner sample `φ`.
    type Inner: Clone + Send;
    /// Outer sample `ζ`.
    type Outer: Clone + Send;

    fn family(&self) -> &'static str;
    fn agents(&self) -> usize;
    fn dim(&self) -> usize;
    fn inner_dim(&self, agent: usize) -> usize;

    fn draw_inner(&self, agent: usize, rng: &mut dyn RngCore) -> Self::Inner;

    /// Draw the `(φ, ζ)` pair used for one stochastic gradient. The default
    /// draws them independently; families that couple the two (a shared task)
    /// override it.
    fn draw_gradient(&self, agent: usize, rng: &mut dyn RngCore) -> (Self::Inner, Self::Outer) {
        let phi = self.draw_inner(agent, rng);
        let zeta = self.draw_outer(agent, rng);
        (phi, zeta)
    }

    fn draw_outer(&self, agent: usize, rng: &mut dyn RngCore) -> Self::Outer;

    /// `G_i(x; φ)`.
    fn inner_value(&self, agent: usize, x: &DVector<f64>, phi: &Self::Inner) -> DVector<f64>;

    /// `∇G_i(x; φ) ∇F_i(z; ζ) ∈ ℝ^d`.
    fn gradient_product(
        &self,
        agent: usize,
        x: &DVector<f64>,
        z: &DVector<f64>,
        phi: &Self::Inner,
        zeta: &Self::Outer,
    ) -> DVector<f64>;

    fn capabilities(&self) -> Capabilities;

    /// `g_i(x)`.
    fn true_inner(&self, _agent: usize, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    /// `∇h(x)`.
    fn true_grad(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    /// `h(x)`.
    fn objective(&self, _x: &DVector<f64>) -> Option<f64> {
        None
    }

    fn optimum(&self) -> Option<&DVector<f64>> {
        None
    }

    fn optimal_value(&self) -> Option<f64> {
        self.optimum().and_then(|x| self.objective(x))
    }

    fn normality_data(&self) -> Option<&NormalityData> {
        None
    }

    /// `(G_i(x_new; φ'), G_i(x_old; φ'))` with one common draw `φ'`.
    fn sample_inner_pair(
        &self,
        agent: usize,
        x_new: &DVector<f64>,
        x_old: &DVector<f64>,
        rng: &mut dyn RngCore,
    ) -> (DVector<f64>, DVector<f64>) {
        let phi = self.draw_inner(agent, rng);
        (self.inner_value(agent, x_new, &phi), self.inner_value(agent, x_old, &phi))
    }

    /// One stochastic gradient `∇G_i(x; φ) ∇F_i(z; ζ)` with a fresh draw.
    fn sample_grad(
        &self,
        agent: usize,
        x: &DVector<f64>,
        z: &DVector<f64>,
        rng: &mut dyn RngCore,
    ) -> DVector<f64> {
        let (phi, zeta) = self.draw_gradient(agent, rng);
        self.gradient_product(agent, x, z, &phi, &zeta)
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub(crate) fn check_positive(name: &str, v: usize) -> crate::Result<()> {
    if v == 0 {
        return crate::error::config_err(format!("{name} must be at least 1"));
    }
    Ok(())
}

pub(crate) fn check_nonneg(name: &str, v: f64) -> crate::Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return crate::error::config_err(format!("{name} must be a finite nonnegative number, got {v}"));
    }
    Ok(())
}
