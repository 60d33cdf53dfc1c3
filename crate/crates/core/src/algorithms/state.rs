use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::sum_rows;

/// Any coordinate above this in magnitude aborts the run.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Per-agent iterates of one synchronous round.
///
/// `y` holds the gradient trackers and `h_prev` the last stochastic gradient
/// each agent drew. Baselines without a tracker keep `y = h_prev`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub k: usize,
    pub x: Vec<DVector<f64>>,
    pub z: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub h_prev: Vec<DVector<f64>>,
}

impl NetworkState {
    pub fn agents(&self) -> usize {
        self.x.len()
    }

    /// `‖Σ_i y_i − Σ_i h_prev_i‖ / max(‖Σ_i h_prev_i‖, ‖Σ_i y_i‖, 1)`.
    pub fn tracking_gap(&self) -> f64 {
        let sy = sum_rows(&self.y);
        let sh = sum_rows(&self.h_prev);
        (&sy - &sh).norm() / sy.norm().max(sh.norm()).max(1.0)
    }

    /// Fails with a divergence error naming the first agent whose `x`, `z`
    /// or `y` is non-finite or exceeds the threshold.
    pub fn check_bounded(&self) -> Result<()> {
        for i in 0..self.agents() {
            let bad = [&self.x[i], &self.z[i], &self.y[i]]
                .iter()
                .any(|v| v.iter().any(|c| !c.is_finite() || c.abs() > DIVERGENCE_THRESHOLD));
            if bad {
                return Err(Error::Divergence { k: self.k, agent: i });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_initial_points(x0: &[DVector<f64>], agents: usize, dim: usize) -> Result<()> {
    if x0.len() != agents {
        return Err(Error::Config(format!("expected {agents} initial points, got {}", x0.len())));
    }
    for (i, x) in x0.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::Config(format!("initial point {i} has dimension {}, expected {dim}", x.len())));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(format!("initial point {i} is not finite")));
        }
    }
    Ok(())
}

/// `(1−β)(z + g_new − g_old) + β g_new`.
pub fn corrected_inner(z: &DVector<f64>, g_new: &DVector<f64>, g_old: &DVector<f64>, beta: f64) -> DVector<f64> {
    (z + g_new - g_old) * (1.0 - beta) + g_new * beta
}

/// `(1−β) z + β g`.
pub fn averaged_inner(z: &DVector<f64>, g: &DVector<f64>, beta: f64) -> DVector<f64> {
    z * (1.0 - beta) + g * beta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(v: f64) -> NetworkState {
        let row = DVector::from_element(2, 1.0);
        let mut s = NetworkState { k: 4, x: vec![row.clone(); 3], z: vec![row.clone(); 3], y: vec![row.clone(); 3], h_prev: vec![row; 3] };
        s.z[2][1] = v;
        s
    }

    #[test]
    fn guard() {
        assert!(state(1.0).check_bounded().is_ok());
        assert_eq!(state(2e6).check_bounded(), Err(Error::Divergence { k: 4, agent: 2 }));
        assert_eq!(state(f64::NAN).check_bounded(), Err(Error::Divergence { k: 4, agent: 2 }));
    }

    #[test]
    fn correction_reduces_to_average() {
        let z = DVector::from_vec(vec![1.0, 2.0]);
        let g = DVector::from_vec(vec![-3.0, 0.5]);
        assert_eq!(corrected_inner(&z, &g, &g, 0.3), averaged_inner(&z, &g, 0.3));
        assert_eq!(corrected_inner(&z, &g, &DVector::zeros(2), 1.0), g);
    }
}
