use nalgebra::DVector;
use rand::RngCore;

use super::{Capabilities, Problem};

/// Views an `n`-agent problem as one agent holding the stacked inner map
/// `[g_1; …; g_n]` and outer function `(1/n) Σ_i f_i(z_i)`.
///
/// This is how the single-agent baselines run on networked problems.
pub struct Centralized<'a, P> {
    inner: &'a P,
    offsets: Vec<usize>,
}

impl<'a, P: Problem> Centralized<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        let mut offsets = vec![0];
        for i in 0..inner.agents() {
            offsets.push(offsets[i] + inner.inner_dim(i));
        }
        Self { inner, offsets }
    }

    /// Split a stacked inner vector into per-agent blocks.
    pub fn split(&self, z: &DVector<f64>) -> Vec<DVector<f64>> {
        (0..self.inner.agents()).map(|i| self.slice(z, i)).collect()
    }

    fn slice(&self, z: &DVector<f64>, i: usize) -> DVector<f64> {
        z.rows(self.offsets[i], self.offsets[i + 1] - self.offsets[i]).into_owned()
    }

    fn stack(&self, parts: Vec<DVector<f64>>) -> DVector<f64> {
        let mut out = DVector::zeros(*self.offsets.last().unwrap());
        for (i, p) in parts.into_iter().enumerate() {
            out.rows_mut(self.offsets[i], p.len()).copy_from(&p);
        }
        out
    }
}

impl<P: Problem> Problem for Centralized<'_, P> {
    type Inner = Vec<P::Inner>;
    type Outer = Vec<P::Outer>;

    fn family(&self) -> &'static str {
        self.inner.family()
    }

    fn agents(&self) -> usize {
        1
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn inner_dim(&self, _agent: usize) -> usize {
        *self.offsets.last().unwrap()
    }

    fn draw_inner(&self, _agent: usize, rng: &mut dyn RngCore) -> Self::Inner {
        (0..self.inner.agents()).map(|i| self.inner.draw_inner(i, rng)).collect()
    }

    fn draw_outer(&self, _agent: usize, rng: &mut dyn RngCore) -> Self::Outer {
        (0..self.inner.agents()).map(|i| self.inner.draw_outer(i, rng)).collect()
    }

    fn draw_gradient(&self, _agent: usize, rng: &mut dyn RngCore) -> (Self::Inner, Self::Outer) {
        (0..self.inner.agents()).map(|i| self.inner.draw_gradient(i, rng)).unzip()
    }

    fn inner_value(&self, _agent: usize, x: &DVector<f64>, phi: &Self::Inner) -> DVector<f64> {
        self.stack(phi.iter().enumerate().map(|(i, p)| self.inner.inner_value(i, x, p)).collect())
    }

    fn gradient_product(
        &self,
        _agent: usize,
        x: &DVector<f64>,
        z: &DVector<f64>,
        phi: &Self::Inner,
        zeta: &Self::Outer,
    ) -> DVector<f64> {
        let n = self.inner.agents();
        let mut acc = DVector::zeros(self.dim());
        for i in 0..n {
            acc += self.inner.gradient_product(i, x, &self.slice(z, i), &phi[i], &zeta[i]);
        }
        acc / n as f64
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { normality: false, ..self.inner.capabilities() }
    }

    fn true_inner(&self, _agent: usize, x: &DVector<f64>) -> Option<DVector<f64>> {
        let parts: Option<Vec<_>> = (0..self.inner.agents()).map(|i| self.inner.true_inner(i, x)).collect();
        parts.map(|p| self.stack(p))
    }

    fn true_grad(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self.inner.true_grad(x)
    }

    fn objective(&self, x: &DVector<f64>) -> Option<f64> {
        self.inner.objective(x)
    }

    fn optimum(&self) -> Option<&DVector<f64>> {
        self.inner.optimum()
    }

    fn optimal_value(&self) -> Option<f64> {
        self.inner.optimal_value()
    }
}
