//! Nonconvex least squares through a sigmoid link.
//!
//! `G_i(x; φ) = s(M_i x) + φ` with `s` the logistic function applied
//! coordinatewise and `φ ~ N(0, σ_φ² I)`; `F_i(z; ζ) = ½‖z − c_i‖² + ζᵀz`
//! with `ζ ~ N(0, σ_ζ² I)`. Targets `c_i = s(M_i x°)` come from a hidden
//! `x°`, so `h ≥ 0` with `h(x°) = 0`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{check_nonneg, check_positive, sigmoid, Capabilities, Problem};
use crate::error::Result;
use crate::linalg::{standard_normal_matrix, standard_normal_vector};

#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidParams {
    pub agents: usize,
    pub dim: usize,
    pub inner_dim: usize,
    pub seed: u64,
    pub noise_inner: f64,
    pub noise_outer: f64,
}

impl Default for SigmoidParams {
    fn default() -> Self {
        Self { agents: 5, dim: 5, inner_dim: 5, seed: 0, noise_inner: 0.1, noise_outer: 0.1 }
    }
}

#[derive(Debug, Clone)]
pub struct SigmoidProblem {
    m: Vec<DMatrix<f64>>,
    c: Vec<DVector<f64>>,
    sigma_phi: f64,
    sigma_zeta: f64,
    x_true: DVector<f64>,
}

pub fn make_sigmoid_least_squares(params: &SigmoidParams) -> Result<SigmoidProblem> {
    check_positive("agents", params.agents)?;
    check_positive("dim", params.dim)?;
    check_positive("inner_dim", params.inner_dim)?;
    check_nonneg("noise_inner", params.noise_inner)?;
    check_nonneg("noise_outer", params.noise_outer)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let scale = 1.0 / (params.dim as f64).sqrt();
    let x_true = standard_normal_vector(params.dim, &mut rng);
    let m: Vec<DMatrix<f64>> = (0..params.agents)
        .map(|_| standard_normal_matrix(params.inner_dim, params.dim, &mut rng) * scale)
        .collect();
    let c = m.iter().map(|mi| (mi * &x_true).map(sigmoid)).collect();
    Ok(SigmoidProblem { m, c, sigma_phi: params.noise_inner, sigma_zeta: params.noise_outer, x_true })
}

impl SigmoidProblem {
    fn link(&self, agent: usize, x: &DVector<f64>) -> DVector<f64> {
        (&self.m[agent] * x).map(sigmoid)
    }

    /// `∇g_i(x) w = M_iᵀ diag(s'(M_i x)) w`.
    fn jacobian_product(&self, agent: usize, x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let pre = &self.m[agent] * x;
        let scaled = DVector::from_fn(w.len(), |k, _| {
            let s = sigmoid(pre[k]);
            s * (1.0 - s) * w[k]
        });
        self.m[agent].tr_mul(&scaled)
    }
}

impl Problem for SigmoidProblem {
    type Inner = DVector<f64>;
    type Outer = DVector<f64>;

    fn family(&self) -> &'static str {
        "sigmoid"
    }

    fn agents(&self) -> usize {
        self.m.len()
    }

    fn dim(&self) -> usize {
        self.x_true.len()
    }

    fn inner_dim(&self, agent: usize) -> usize {
        self.m[agent].nrows()
    }

    fn draw_inner(&self, agent: usize, rng: &mut dyn RngCore) -> DVector<f64> {
        DVector::from_fn(self.inner_dim(agent), |_, _| self.sigma_phi * rng.sample::<f64, _>(StandardNormal))
    }

    fn draw_outer(&self, agent: usize, rng: &mut dyn RngCore) -> DVector<f64> {
        DVector::from_fn(self.inner_dim(agent), |_, _| self.sigma_zeta * rng.sample::<f64, _>(StandardNormal))
    }

    fn inner_value(&self, agent: usize, x: &DVector<f64>, phi: &DVector<f64>) -> DVector<f64> {
        self.link(agent, x) + phi
    }

    fn gradient_product(
        &self,
        agent: usize,
        x: &DVector<f64>,
        z: &DVector<f64>,
        _phi: &DVector<f64>,
        zeta: &DVector<f64>,
    ) -> DVector<f64> {
        self.jacobian_product(agent, x, &(z - &self.c[agent] + zeta))
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { true_g: true, true_grad: true, optimum: true, normality: false }
    }

    fn true_inner(&self, agent: usize, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(self.link(agent, x))
    }

    fn true_grad(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.agents();
        let mut g = DVector::zeros(self.dim());
        for i in 0..n {
            g += self.jacobian_product(i, x, &(self.link(i, x) - &self.c[i]));
        }
        Some(g / n as f64)
    }

    fn objective(&self, x: &DVector<f64>) -> Option<f64> {
        let n = self.agents();
        let total: f64 = (0..n).map(|i| 0.5 * (self.link(i, x) - &self.c[i]).norm_squared()).sum();
        Some(total / n as f64)
    }

    fn optimum(&self) -> Option<&DVector<f64>> {
        Some(&self.x_true)
    }
}
