//! Logistic regression with an independent inner perturbation of the features.
//!
//! Agent `i` holds `m` labelled points `(a_j, b_j)`. The inner map is
//! `G_i(x; φ)_j = -b_j (φ + a_j)ᵀ x` with `φ ~ N(0, I_d)` and the outer
//! function is `f_i(z) = (1/m) Σ_j log(1 + e^{z_j})`, deterministic.
//! With `fixed_inner_pool = Some(l)` the perturbation is instead drawn
//! uniformly from `l` vectors fixed at construction.

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{check_positive, sigmoid, softplus, Capabilities, Problem};
use crate::error::{Error, Result};
use crate::linalg::{standard_normal_matrix, standard_normal_vector};

const LABEL_NOISE: f64 = 0.1;
/// Norm of the hidden separator; matched to the label noise so a fraction of
/// labels flip and the empirical loss has a finite minimiser.
const HIDDEN_NORM: f64 = 0.1;
/// Average loss below this at the computed minimiser means the data are
/// (numerically) separable.
const SEPARABLE_LOSS: f64 = 1e-8;
const NEWTON_MAX_ITERS: usize = 200;
const NEWTON_GRAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    pub agents: usize,
    pub samples_per_agent: usize,
    pub dim: usize,
    pub seed: u64,
    pub fixed_inner_pool: Option<usize>,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { agents: 10, samples_per_agent: 20, dim: 10, seed: 0, fixed_inner_pool: None }
    }
}

#[derive(Debug, Clone)]
pub struct LogisticProblem {
    /// Rows are the features `a_j` of one agent.
    features: Vec<DMatrix<f64>>,
    labels: Vec<DVector<f64>>,
    pool: Option<Vec<DVector<f64>>>,
    /// `E[φ]`: zero for the population variant, the pool mean otherwise.
    phi_mean: DVector<f64>,
    x_star: DVector<f64>,
}

pub fn make_logistic_cso(params: &LogisticParams) -> Result<LogisticProblem> {
    check_positive("agents", params.agents)?;
    check_positive("samples_per_agent", params.samples_per_agent)?;
    check_positive("dim", params.dim)?;
    if params.fixed_inner_pool == Some(0) {
        return crate::error::config_err("fixed_inner_pool must be at least 1");
    }
    let d = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let direction = standard_normal_vector(d, &mut rng);
    let hidden = &direction * (HIDDEN_NORM / direction.norm().max(f64::MIN_POSITIVE));
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..params.agents {
        let a = standard_normal_matrix(params.samples_per_agent, d, &mut rng);
        let b = DVector::from_fn(params.samples_per_agent, |j, _| {
            let score = a.row(j).transpose().dot(&hidden) + LABEL_NOISE * rng.sample::<f64, _>(StandardNormal);
            if score >= 0.0 {
                1.0
            } else {
                -1.0
            }
        });
        features.push(a);
        labels.push(b);
    }
    let pool = params
        .fixed_inner_pool
        .map(|l| (0..l).map(|_| standard_normal_vector(d, &mut rng)).collect::<Vec<_>>());
    let phi_mean = match &pool {
        Some(p) => p.iter().fold(DVector::zeros(d), |acc, v| acc + v) / p.len() as f64,
        None => DVector::zeros(d),
    };
    let mut problem = LogisticProblem { features, labels, pool, phi_mean, x_star: DVector::zeros(d) };
    problem.x_star = problem.solve_optimum()?;
    Ok(problem)
}

impl LogisticProblem {
    pub fn samples_per_agent(&self, agent: usize) -> usize {
        self.labels[agent].len()
    }

    /// Effective feature `b_j (E[φ] + a_j)` of sample `j`; `g_i(x)_j` is minus
    /// its inner product with `x`.
    fn signed_feature(&self, agent: usize, j: usize, phi: &DVector<f64>) -> DVector<f64> {
        (self.features[agent].row(j).transpose() + phi) * self.labels[agent][j]
    }

    /// Value, gradient and Hessian of the population objective.
    fn derivatives(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let d = x.len();
        let mut value = 0.0;
        let mut grad = DVector::zeros(d);
        let mut hess = DMatrix::zeros(d, d);
        let n = self.features.len() as f64;
        for i in 0..self.features.len() {
            let m = self.samples_per_agent(i) as f64;
            for j in 0..self.samples_per_agent(i) {
                let c = self.signed_feature(i, j, &self.phi_mean);
                let t = -c.dot(x);
                let s = sigmoid(t);
                value += softplus(t) / (n * m);
                grad.axpy(-s / (n * m), &c, 1.0);
                hess.ger(s * (1.0 - s) / (n * m), &c, &c, 1.0);
            }
        }
        (value, grad, hess)
    }

    /// Damped Newton on the deterministic objective.
    fn solve_optimum(&self) -> Result<DVector<f64>> {
        let d = self.phi_mean.len();
        let mut x = DVector::zeros(d);
        for _ in 0..NEWTON_MAX_ITERS {
            let (value, grad, hess) = self.derivatives(&x);
            if value < SEPARABLE_LOSS {
                break;
            }
            if grad.amax() < NEWTON_GRAD_TOL {
                return Ok(x);
            }
            let step = hess
                .cholesky()
                .ok_or_else(|| Error::Numerical { message: "logistic Hessian singular".into(), last_estimate: grad.norm() })?
                .solve(&grad);
            let slope = grad.dot(&step);
            let mut t = 1.0;
            loop {
                let trial = &x - &step * t;
                if self.derivatives(&trial).0 <= value - 0.25 * t * slope || t < 1e-12 {
                    x = trial;
                    break;
                }
                t *= 0.5;
            }
        }
        let (value, grad, _) = self.derivatives(&x);
        if value >= SEPARABLE_LOSS && grad.amax() < 1e-9 {
            return Ok(x);
        }
        Err(Error::Numerical {
            message: "logistic optimum not found; data may be separable".into(),
            last_estimate: grad.norm(),
        })
    }

    /// One CSV row per sample: `agent,label,f1,…,fd`.
    pub fn data_csv(&self) -> String {
        let d = self.phi_mean.len();
        let mut s = String::from("agent,label");
        for k in 0..d {
            write!(s, ",f{}", k + 1).unwrap();
        }
        s.push('\n');
        for (i, (a, b)) in self.features.iter().zip(&self.labels).enumerate() {
            for j in 0..b.len() {
                write!(s, "{},{}", i + 1, b[j]).unwrap();
                for k in 0..d {
                    write!(s, ",{:.17e}", a[(j, k)]).unwrap();
                }
                s.push('\n');
            }
        }
        s
    }

    /// `f_i(z)`.
    pub fn outer_value(&self, agent: usize, z: &DVector<f64>) -> f64 {
        z.iter().map(|&t| softplus(t)).sum::<f64>() / self.samples_per_agent(agent) as f64
    }
}

impl Problem for LogisticProblem {
    type Inner = DVector<f64>;
    type Outer = ();

    fn family(&self) -> &'static str {
        "logistic"
    }

    fn agents(&self) -> usize {
        self.features.len()
    }

    fn dim(&self) -> usize {
        self.phi_mean.len()
    }

    fn inner_dim(&self, agent: usize) -> usize {
        self.samples_per_agent(agent)
    }

    fn draw_inner(&self, _agent: usize, rng: &mut dyn RngCore) -> DVector<f64> {
        match &self.pool {
            Some(pool) => pool[rng.random_range(0..pool.len())].clone(),
            None => standard_normal_vector(self.dim(), rng),
        }
    }

    fn draw_outer(&self, _agent: usize, _rng: &mut dyn RngCore) {}

    fn inner_value(&self, agent: usize, x: &DVector<f64>, phi: &DVector<f64>) -> DVector<f64> {
        let shift = phi.dot(x);
        let ax = &self.features[agent] * x;
        DVector::from_fn(ax.len(), |j, _| -self.labels[agent][j] * (ax[j] + shift))
    }

    fn gradient_product(
        &self,
        agent: usize,
        _x: &DVector<f64>,
        z: &DVector<f64>,
        phi: &DVector<f64>,
        _zeta: &(),
    ) -> DVector<f64> {
        // column j of ∇G is -b_j (φ + a_j); ∇f(z)_j = σ(z_j)/m
        let m = self.samples_per_agent(agent) as f64;
        let w = DVector::from_fn(z.len(), |j, _| -self.labels[agent][j] * sigmoid(z[j]) / m);
        self.features[agent].tr_mul(&w) + phi * w.sum()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { true_g: true, true_grad: true, optimum: true, normality: false }
    }

    fn true_inner(&self, agent: usize, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(self.inner_value(agent, x, &self.phi_mean))
    }

    fn true_grad(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.agents();
        let mut g = DVector::zeros(self.dim());
        for i in 0..n {
            let z = self.inner_value(i, x, &self.phi_mean);
            g += self.gradient_product(i, x, &z, &self.phi_mean, &());
        }
        Some(g / n as f64)
    }

    fn objective(&self, x: &DVector<f64>) -> Option<f64> {
        let n = self.agents();
        let total: f64 = (0..n).map(|i| self.outer_value(i, &self.inner_value(i, x, &self.phi_mean))).sum();
        Some(total / n as f64)
    }

    fn optimum(&self) -> Option<&DVector<f64>> {
        Some(&self.x_star)
    }
}
