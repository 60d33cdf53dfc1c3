//! Push-pull gradient tracking with a stochastically corrected inner tracker.

use nalgebra::DVector;

use super::state::{check_initial_points, corrected_inner, NetworkState};
use crate::error::Result;
use crate::linalg::{mix, SparseRows};
use crate::problems::Problem;
use crate::rng::RngStreams;

/// Round `k = 1`: `z_i = G_i(x_i; φ')`, `y_i = h_i = ∇G_i(x_i; φ)∇F_i(z_i; ζ)`.
pub fn ab_dscsc_init<P: Problem + ?Sized>(
    problem: &P,
    x0: &[DVector<f64>],
    streams: &RngStreams,
) -> Result<NetworkState> {
    check_initial_points(x0, problem.agents(), problem.dim())?;
    let mut z = Vec::with_capacity(x0.len());
    let mut h = Vec::with_capacity(x0.len());
    for (i, x) in x0.iter().enumerate() {
        let phi = problem.draw_inner(i, &mut streams.inner(i, 1));
        let zi = problem.inner_value(i, x, &phi);
        h.push(problem.sample_grad(i, x, &zi, &mut streams.gradient(i, 1)));
        z.push(zi);
    }
    let state = NetworkState { k: 1, x: x0.to_vec(), z, y: h.clone(), h_prev: h };
    state.check_bounded()?;
    Ok(state)
}

/// One synchronous round. All agents take the consensus step, then the inner
/// correction with one common draw at both points, then the tracker update
/// with a fresh gradient draw.
pub fn ab_dscsc_step<P: Problem + ?Sized>(
    state: &mut NetworkState,
    problem: &P,
    a: &SparseRows,
    b: &SparseRows,
    alpha: f64,
    beta: f64,
    streams: &RngStreams,
) -> Result<()> {
    let n = state.agents();
    let round = state.k + 1;
    let moved: Vec<DVector<f64>> = state.x.iter().zip(&state.y).map(|(x, y)| x - y * alpha).collect();
    let x_new = mix(a, &moved);
    for i in 0..n {
        let (g_new, g_old) = problem.sample_inner_pair(i, &x_new[i], &state.x[i], &mut streams.inner(i, round));
        state.z[i] = corrected_inner(&state.z[i], &g_new, &g_old, beta);
    }
    let h: Vec<DVector<f64>> =
        (0..n).map(|i| problem.sample_grad(i, &x_new[i], &state.z[i], &mut streams.gradient(i, round))).collect();
    let y_mixed = mix(b, &state.y);
    for i in 0..n {
        state.y[i] = (&y_mixed[i] - &state.h_prev[i]) + &h[i];
    }
    state.x = x_new;
    state.h_prev = h;
    state.k = round;
    state.check_bounded()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse_rows;
    use crate::problems::{make_quadratic, QuadraticParams};
    use crate::topology::{build_weight_pair, generate_ring_plus_random};

    #[test]
    fn noiseless_init_is_exact_gradient() {
        let p = make_quadratic(&QuadraticParams { agents: 3, dim: 2, seed: 5, ..Default::default() }).unwrap();
        let x0 = vec![DVector::zeros(2); 3];
        let s = ab_dscsc_init(&p, &x0, &RngStreams::new(1)).unwrap();
        for i in 0..3 {
            let want = p.inner_map(i).tr_mul(&p.outer_grad(i, &DVector::zeros(2)));
            assert_eq!(s.y[i], want);
            assert_eq!(s.h_prev[i], want);
        }
        assert_eq!(s.k, 1);
    }

    #[test]
    fn noiseless_quadratic_converges() {
        let p = make_quadratic(&QuadraticParams { agents: 3, dim: 2, seed: 5, ..Default::default() }).unwrap();
        let g = generate_ring_plus_random(3, 2, 1).unwrap();
        let w = build_weight_pair(&g, &g).unwrap();
        let (a, b) = (sparse_rows(&w.a), sparse_rows(&w.b));
        let streams = RngStreams::new(0);
        let mut s = ab_dscsc_init(&p, &vec![DVector::zeros(2); 3], &streams).unwrap();
        for _ in 0..5000 {
            ab_dscsc_step(&mut s, &p, &a, &b, 0.05, 0.05 / 3.0, &streams).unwrap();
            assert!(s.tracking_gap() < 1e-10);
        }
        let xs = p.optimum().unwrap();
        for x in &s.x {
            assert!((x - xs).norm() < 1e-6, "{}", (x - xs).norm());
        }
    }

    #[test]
    fn divergence_is_reported() {
        let p = make_quadratic(&QuadraticParams { agents: 3, dim: 2, seed: 5, conditioning: 50.0, ..Default::default() })
            .unwrap();
        let g = generate_ring_plus_random(3, 0, 1).unwrap();
        let w = build_weight_pair(&g, &g).unwrap();
        let (a, b) = (sparse_rows(&w.a), sparse_rows(&w.b));
        let streams = RngStreams::new(0);
        let mut s = ab_dscsc_init(&p, &vec![DVector::from_element(2, 1.0); 3], &streams).unwrap();
        let err = (0..10_000).find_map(|_| ab_dscsc_step(&mut s, &p, &a, &b, 5.0, 0.5, &streams).err());
        assert!(matches!(err, Some(crate::Error::Divergence { .. })), "{err:?}");
    }
}
