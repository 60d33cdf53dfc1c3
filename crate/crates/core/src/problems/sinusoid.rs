//! Sinusoid regression meta-learning as a compositional problem.
//!
//! Each agent owns a fixed set of tasks `s(b) = a sin(b + ϕ)`. With a task `m`
//! and a minibatch drawn uniformly, the inner map is one adaptation step
//! `G(x; ζ') = x − α ∇F_m(x; ζ')` and the outer function is the minibatch
//! loss `F_m(z; ζ)`. The product `∇G(x; φ) ∇F_m(z; ζ)` is
//! `w − α ∇²F_m(x; φ) w` with `w = ∇F_m(z; ζ)`; the Hessian-vector product
//! is a central difference of minibatch gradients.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mlp::Mlp;
use super::{check_positive, Capabilities, Problem};
use crate::error::{config_err, Result};

const INPUT_RANGE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MamlParams {
    pub agents: usize,
    pub tasks_per_agent: usize,
    pub hidden_width: usize,
    pub adapt_step: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MamlParams {
    fn default() -> Self {
        Self { agents: 5, tasks_per_agent: 200, hidden_width: 40, adapt_step: 0.01, batch_size: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidTask {
    pub amplitude: f64,
    pub phase: f64,
}

impl SinusoidTask {
    pub fn sample(rng: &mut dyn RngCore) -> Self {
        Self { amplitude: rng.random_range(0.1..=5.0), phase: rng.random_range(0.0..=2.0 * PI) }
    }

    pub fn target(&self, input: f64) -> f64 {
        self.amplitude * (input + self.phase).sin()
    }
}

/// A task index together with the minibatch inputs drawn for it.
#[derive(Debug, Clone, PartialEq)]
pub struct MamlSample {
    pub task: usize,
    pub inputs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SinusoidMaml {
    net: Mlp,
    tasks: Vec<Vec<SinusoidTask>>,
    adapt_step: f64,
    batch_size: usize,
    init: DVector<f64>,
}

pub fn make_sinusoid_maml(params: &MamlParams) -> Result<SinusoidMaml> {
    check_positive("agents", params.agents)?;
    check_positive("tasks_per_agent", params.tasks_per_agent)?;
    check_positive("hidden_width", params.hidden_width)?;
    check_positive("batch_size", params.batch_size)?;
    if !(params.adapt_step >= 0.0 && params.adapt_step.is_finite()) {
        return config_err(format!("adapt_step must be nonnegative, got {}", params.adapt_step));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let net = Mlp::new(params.hidden_width);
    let tasks = (0..params.agents)
        .map(|_| (0..params.tasks_per_agent).map(|_| SinusoidTask::sample(&mut rng)).collect())
        .collect();
    let init = net.init(&mut rng);
    Ok(SinusoidMaml { net, tasks, adapt_step: params.adapt_step, batch_size: params.batch_size, init })
}

impl SinusoidMaml {
    pub fn net(&self) -> &Mlp {
        &self.net
    }

    /// Seeded network initialisation, shared by every agent as `x_1`.
    pub fn initial_params(&self) -> &DVector<f64> {
        &self.init
    }

    pub fn task(&self, agent: usize, task: usize) -> SinusoidTask {
        self.tasks[agent][task]
    }

    fn draw_sample(&self, agent: usize, task: usize, rng: &mut dyn RngCore) -> MamlSample {
        let _ = agent;
        MamlSample {
            task,
            inputs: (0..self.batch_size).map(|_| rng.random_range(-INPUT_RANGE..=INPUT_RANGE)).collect(),
        }
    }

    /// Minibatch loss `F_m(x; ζ)` and its gradient.
    pub fn loss_and_grad(&self, agent: usize, x: &DVector<f64>, sample: &MamlSample) -> (f64, DVector<f64>) {
        let task = self.tasks[agent][sample.task];
        let targets: Vec<f64> = sample.inputs.iter().map(|&b| task.target(b)).collect();
        self.net.mse_and_grad(x, &sample.inputs, &targets)
    }

    /// `∇²F_m(x; φ) w` by central differences of minibatch gradients.
    pub fn hessian_vector_product(
        &self,
        agent: usize,
        x: &DVector<f64>,
        w: &DVector<f64>,
        sample: &MamlSample,
    ) -> DVector<f64> {
        let eps = 1e-4 * (1.0 + x.norm()) / w.norm().max(1e-12);
        let plus = self.loss_and_grad(agent, &(x + w * eps), sample).1;
        let minus = self.loss_and_grad(agent, &(x - w * eps), sample).1;
        (plus - minus) / (2.0 * eps)
    }

    /// Loss after one full adaptation step averaged over fresh minibatches of
    /// every task the agent owns.
    pub fn adapted_loss(&self, agent: usize, x: &DVector<f64>, rng: &mut dyn RngCore) -> f64 {
        let tasks = self.tasks[agent].len();
        let mut total = 0.0;
        for m in 0..tasks {
            let inner = self.draw_sample(agent, m, rng);
            let outer = self.draw_sample(agent, m, rng);
            let adapted = self.inner_value(agent, x, &inner);
            total += self.loss_and_grad(agent, &adapted, &outer).0;
        }
        total / tasks as f64
    }
}

impl Problem for SinusoidMaml {
    type Inner = MamlSample;
    type Outer = MamlSample;

    fn family(&self) -> &'static str {
        "maml"
    }

    fn agents(&self) -> usize {
        self.tasks.len()
    }

    fn dim(&self) -> usize {
        self.net.param_count()
    }

    fn inner_dim(&self, _agent: usize) -> usize {
        self.net.param_count()
    }

    fn draw_inner(&self, agent: usize, rng: &mut dyn RngCore) -> MamlSample {
        let task = rng.random_range(0..self.tasks[agent].len());
        self.draw_sample(agent, task, rng)
    }

    fn draw_outer(&self, agent: usize, rng: &mut dyn RngCore) -> MamlSample {
        self.draw_inner(agent, rng)
    }

    /// Both halves of a gradient sample share one task.
    fn draw_gradient(&self, agent: usize, rng: &mut dyn RngCore) -> (MamlSample, MamlSample) {
        let phi = self.draw_inner(agent, rng);
        let zeta = self.draw_sample(agent, phi.task, rng);
        (phi, zeta)
    }

    fn inner_value(&self, agent: usize, x: &DVector<f64>, phi: &MamlSample) -> DVector<f64> {
        if self.adapt_step == 0.0 {
            return x.clone();
        }
        x - self.loss_and_grad(agent, x, phi).1 * self.adapt_step
    }

    fn gradient_product(
        &self,
        agent: usize,
        x: &DVector<f64>,
        z: &DVector<f64>,
        phi: &MamlSample,
        zeta: &MamlSample,
    ) -> DVector<f64> {
        let w = self.loss_and_grad(agent, z, zeta).1;
        if self.adapt_step == 0.0 {
            return w;
        }
        let hvp = self.hessian_vector_product(agent, x, &w, phi);
        w - hvp * self.adapt_step
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }
}
