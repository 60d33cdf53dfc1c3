use nalgebra::{DMatrix, DVector};

use super::graph::{assumption2_violation, DirectedGraph};
use super::spectral::{column_centering, contraction_factor, row_centering};
use crate::error::{Error, Result};

/// Iteration cap for the Perron-vector power iteration.
pub const PERRON_MAX_ITERS: usize = 100_000;
const PERRON_TOL: f64 = 1e-13;
const CLIP_TOL: f64 = 1e-12;
const NEGATIVE_TOL: f64 = 1e-9;

/// Row-stochastic `A`, column-stochastic `B`, their Perron vectors and
/// contraction factors.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Left Perron vector of `A`, `uᵀA = uᵀ`, `uᵀ1 = n`.
    pub u: DVector<f64>,
    /// Right Perron vector of `B`, `Bv = v`, `1ᵀv = n`.
    pub v: DVector<f64>,
    pub tau_a: f64,
    pub tau_b: f64,
}

impl WeightPair {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `uᵀv`, positive whenever the network assumption holds.
    pub fn uv(&self) -> f64 {
        self.u.dot(&self.v)
    }

    /// Pair for a lone agent: `A = B = [1]`.
    pub fn single() -> Self {
        let one = DMatrix::from_element(1, 1, 1.0);
        let ones = DVector::from_element(1, 1.0);
        Self { a: one.clone(), b: one, u: ones.clone(), v: ones, tau_a: 0.0, tau_b: 0.0 }
    }

    /// Pair for a symmetric doubly stochastic `W` used on both sides.
    pub fn doubly_stochastic(w: DMatrix<f64>) -> Result<Self> {
        let n = w.nrows();
        let ones = DVector::from_element(n, 1.0);
        let c = row_centering(&ones);
        let tau = contraction_factor(&w, &c)?;
        Ok(Self { a: w.clone(), b: w, u: ones.clone(), v: ones, tau_a: tau, tau_b: tau })
    }
}

/// Uniform in-neighbour weights: `m_ij = 1/|N_in(i)|` for every in-edge.
fn uniform_in_weights(g: &DirectedGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let nb = g.in_neighbors(i);
        let w = 1.0 / nb.len() as f64;
        for j in nb {
            m[(i, j)] = w;
        }
    }
    m
}

/// Build `A` on `G_A` and `B` on the reverse of `G_{Bᵀ}`.
///
/// An edge `j → i` of `G_{Bᵀ}` means `B_ji > 0`; column `i` of `B` spreads
/// uniformly over the in-neighbours of `i` in `G_{Bᵀ}`, which is the
/// out-neighbourhood of `i` in `G_B`.
pub fn build_weight_pair(ga: &DirectedGraph, gbt: &DirectedGraph) -> Result<WeightPair> {
    if let Some(clause) = assumption2_violation(ga, gbt) {
        return Err(Error::Assumption(clause));
    }
    let a = uniform_in_weights(ga);
    let b = uniform_in_weights(gbt).transpose();
    let u = perron_left(&a)?;
    let v = perron_right(&b)?;
    let tau_a = contraction_factor(&a, &row_centering(&u))?;
    let tau_b = contraction_factor(&b, &column_centering(&v))?;
    Ok(WeightPair { a, b, u, v, tau_a, tau_b })
}

/// Power iteration `w ← M w` from the all-ones vector. `M` must preserve the
/// coordinate sum (column-stochastic), so no renormalisation is needed and the
/// step size equals the eigen-residual.
fn sum_preserving_power_iteration(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = m.nrows();
    let mut w = DVector::from_element(n, 1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..PERRON_MAX_ITERS {
        let next = m * &w;
        residual = (&next - &w).amax();
        w = next;
        if residual <= PERRON_TOL * n as f64 {
            break;
        }
    }
    if residual > PERRON_TOL * n as f64 {
        return Err(Error::Numerical {
            message: format!("Perron power iteration did not converge in {PERRON_MAX_ITERS} steps"),
            last_estimate: residual,
        });
    }
    for x in w.iter_mut() {
        if *x < -NEGATIVE_TOL {
            return Err(Error::Numerical {
                message: "Perron vector has a negative entry".into(),
                last_estimate: *x,
            });
        }
        if *x < CLIP_TOL {
            *x = x.max(0.0);
        }
    }
    let scale = n as f64 / w.sum();
    Ok(w * scale)
}

/// Left Perron vector of a row-stochastic matrix, normalised to `uᵀ1 = n`.
pub fn perron_left(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    sum_preserving_power_iteration(&a.transpose())
}

/// Right Perron vector of a column-stochastic matrix, normalised to `1ᵀv = n`.
pub fn perron_right(b: &DMatrix<f64>) -> Result<DVector<f64>> {
    sum_preserving_power_iteration(b)
}

/// Metropolis-Hastings weights on the underlying undirected graph.
pub fn underlying_metropolis(g: &DirectedGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut nbrs = vec![std::collections::BTreeSet::new(); n];
    for (a, b) in g.edges() {
        nbrs[a].insert(b);
        nbrs[b].insert(a);
    }
    let deg: Vec<usize> = nbrs.iter().map(|s| s.len()).collect();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in &nbrs[i] {
            w[(i, j)] = 1.0 / (1 + deg[i].max(deg[j])) as f64;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    w
}
