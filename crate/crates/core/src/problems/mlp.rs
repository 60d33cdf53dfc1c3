//! Scalar regressor `ℝ → ℝ` with two ReLU hidden layers, forward and backward
//! passes written out by hand over a flat parameter vector.

use nalgebra::DVector;
use rand::{Rng, RngCore};

/// Layout of the flat parameter vector:
/// `[W1 (w), b1 (w), W2 (w×w, row-major), b2 (w), W3 (w), b3 (1)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mlp {
    width: usize,
}

impl Mlp {
    pub fn new(width: usize) -> Self {
        assert!(width >= 1);
        Self { width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn param_count(&self) -> usize {
        let w = self.width;
        w * w + 4 * w + 1
    }

    fn offsets(&self) -> [usize; 6] {
        let w = self.width;
        let w1 = 0;
        let b1 = w1 + w;
        let w2 = b1 + w;
        let b2 = w2 + w * w;
        let w3 = b2 + w;
        let b3 = w3 + w;
        [w1, b1, w2, b2, w3, b3]
    }

    /// He-uniform weights scaled by fan-in, zero biases.
    pub fn init(&self, rng: &mut dyn RngCore) -> DVector<f64> {
        let w = self.width;
        let [w1, _, w2, _, w3, _] = self.offsets();
        let mut p = DVector::zeros(self.param_count());
        let mut fill = |start: usize, len: usize, fan_in: usize| {
            let bound = (6.0 / fan_in as f64).sqrt();
            for k in start..start + len {
                p[k] = rng.random_range(-bound..bound);
            }
        };
        fill(w1, w, 1);
        fill(w2, w * w, w);
        fill(w3, w, w);
        p
    }

    pub fn forward(&self, params: &DVector<f64>, input: f64) -> f64 {
        let w = self.width;
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let h1: Vec<f64> = (0..w).map(|k| (params[w1 + k] * input + params[b1 + k]).max(0.0)).collect();
        let mut out = params[b3];
        for r in 0..w {
            let mut pre = params[b2 + r];
            for c in 0..w {
                pre += params[w2 + r * w + c] * h1[c];
            }
            out += params[w3 + r] * pre.max(0.0);
        }
        out
    }

    /// Mean squared error over the batch and its gradient.
    pub fn mse_and_grad(&self, params: &DVector<f64>, inputs: &[f64], targets: &[f64]) -> (f64, DVector<f64>) {
        let w = self.width;
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let mut grad = DVector::zeros(self.param_count());
        let mut loss = 0.0;
        let scale = 1.0 / inputs.len() as f64;
        let mut pre1 = vec![0.0; w];
        let mut h1 = vec![0.0; w];
        let mut pre2 = vec![0.0; w];
        let mut h2 = vec![0.0; w];
        let mut d2 = vec![0.0; w];
        for (&x, &y) in inputs.iter().zip(targets) {
            for k in 0..w {
                pre1[k] = params[w1 + k] * x + params[b1 + k];
                h1[k] = pre1[k].max(0.0);
            }
            let mut out = params[b3];
            for r in 0..w {
                let mut pre = params[b2 + r];
                for c in 0..w {
                    pre += params[w2 + r * w + c] * h1[c];
                }
                pre2[r] = pre;
                h2[r] = pre.max(0.0);
                out += params[w3 + r] * h2[r];
            }
            let err = out - y;
            loss += err * err * scale;
            let dout = 2.0 * err * scale;
            grad[b3] += dout;
            for r in 0..w {
                grad[w3 + r] += dout * h2[r];
                d2[r] = if pre2[r] > 0.0 { dout * params[w3 + r] } else { 0.0 };
                grad[b2 + r] += d2[r];
            }
            for c in 0..w {
                let mut dh1 = 0.0;
                for r in 0..w {
                    grad[w2 + r * w + c] += d2[r] * h1[c];
                    dh1 += d2[r] * params[w2 + r * w + c];
                }
                if pre1[c] > 0.0 {
                    grad[w1 + c] += dh1 * x;
                    grad[b1 + c] += dh1;
                }
            }
        }
        (loss, grad)
    }
}
