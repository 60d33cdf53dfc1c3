//! Averaged-iterate statistics over independent replications and their
//! comparison with the closed-form limiting covariance.

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::algorithms::{run_observed, Algorithm, BetaRule, Network, NetworkState, RunOptions, RunStatus, StepSchedule};
use crate::error::{config_err, Error, Result};
use crate::linalg::symmetrize;
use crate::problems::{NormalityData, Problem};

/// Minimum number of replications for a covariance comparison.
pub const MIN_REPLICATIONS: usize = 50;

/// `√k`-scaled running sums of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSample {
    /// `(1/√k) Σ_{t≤k} (x_{i,t} − x*)`.
    pub top: DVector<f64>,
    /// `(1/√k) Σ_{t≤k} (1/n) Σ_j ∇g_j(x*) T_j (z_{j,t} − g_j(x_{j,t}))`.
    pub bottom: DVector<f64>,
    pub agent: usize,
    pub k: usize,
    pub seed: u64,
}

impl DeltaSample {
    /// `[top; bottom]`.
    pub fn stacked(&self) -> DVector<f64> {
        let d = self.top.len();
        DVector::from_fn(2 * d, |r, _| if r < d { self.top[r] } else { self.bottom[r - d] })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityOptions {
    pub replications: usize,
    /// Length `k` of each run; states `t = 1, …, k` enter the sums.
    pub k: usize,
    pub base_seed: u64,
    /// Starting point shared by all agents; the optimum if `None`.
    pub start: Option<DVector<f64>>,
}

/// Running sums for every agent of one trajectory.
struct Accumulator<'a, P: Problem + ?Sized> {
    problem: &'a P,
    x_star: &'a DVector<f64>,
    /// `∇g_j(x*) T_j`, `d × p_j`.
    weights: Vec<DMatrix<f64>>,
    top: Vec<DVector<f64>>,
    bottom: DVector<f64>,
    steps: usize,
}

impl<'a, P: Problem + ?Sized> Accumulator<'a, P> {
    fn new(problem: &'a P, data: &NormalityData, x_star: &'a DVector<f64>) -> Self {
        let n = problem.agents();
        let d = problem.dim();
        let weights = (0..n).map(|j| &data.inner_jacobian[j] * &data.t[j]).collect();
        Self { problem, x_star, weights, top: vec![DVector::zeros(d); n], bottom: DVector::zeros(d), steps: 0 }
    }

    fn add(&mut self, state: &NetworkState) {
        let n = self.top.len();
        for i in 0..n {
            self.top[i] += &state.x[i] - self.x_star;
        }
        for j in 0..n {
            let g = self.problem.true_inner(j, &state.x[j]).expect("checked capability");
            self.bottom.gemv(1.0 / n as f64, &self.weights[j], &(&state.z[j] - g), 1.0);
        }
        self.steps += 1;
    }

    fn finish(self, seed: u64) -> Vec<DeltaSample> {
        let scale = 1.0 / (self.steps as f64).sqrt();
        let bottom = &self.bottom * scale;
        let k = self.steps;
        self.top
            .into_iter()
            .enumerate()
            .map(|(agent, top)| DeltaSample { top: top * scale, bottom: bottom.clone(), agent, k, seed })
            .collect()
    }
}

fn check_inputs<'a, P: Problem + ?Sized>(
    problem: &'a P,
    schedule: &StepSchedule,
) -> Result<(&'a NormalityData, &'a DVector<f64>)> {
    let data = problem.normality_data().ok_or(Error::Capability("normality study needs closed-form H, T_j, S1, S2"))?;
    let x_star = problem.optimum().ok_or(Error::Capability("normality study needs the optimum"))?;
    if !problem.capabilities().true_g {
        return Err(Error::Capability("normality study needs the true inner map"));
    }
    match (schedule.polynomial_exponent(), schedule.beta) {
        (Some(e), BetaRule::Proportional(_)) if e > 0.5 && e < 1.0 => Ok((data, x_star)),
        _ => config_err("normality study needs alpha_k = a/(k+b)^e with e in (1/2, 1) and beta_k proportional to alpha_k"),
    }
}

/// One AB-DSCSC replication per seed `base_seed + r`, returning the samples
/// of every agent: `result[r][i]`.
pub fn collect_delta_all_agents<P: Problem>(
    problem: &P,
    network: &Network,
    schedule: &StepSchedule,
    options: &NormalityOptions,
) -> Result<Vec<Vec<DeltaSample>>> {
    let (data, x_star) = check_inputs(problem, schedule)?;
    if options.k < 2 {
        return config_err("k must be at least 2");
    }
    let start = options.start.clone().unwrap_or_else(|| x_star.clone());
    let x0 = vec![start; problem.agents()];
    (0..options.replications)
        .into_par_iter()
        .map(|r| {
            let seed = options.base_seed + r as u64;
            let mut acc = Accumulator::new(problem, data, x_star);
            let run_opts = RunOptions { iterations: options.k - 1, stride: options.k, seed };
            let record =
                run_observed(&Algorithm::AbDscsc, problem, network, schedule, &x0, &run_opts, &mut |s| acc.add(s))?;
            if let RunStatus::Diverged { k, agent } = record.status {
                return Err(Error::Divergence { k, agent });
            }
            Ok(acc.finish(seed))
        })
        .collect()
}

/// Samples for one agent.
pub fn collect_delta<P: Problem>(
    problem: &P,
    network: &Network,
    schedule: &StepSchedule,
    options: &NormalityOptions,
    agent: usize,
) -> Result<Vec<DeltaSample>> {
    if agent >= problem.agents() {
        return config_err(format!("agent {agent} out of range"));
    }
    Ok(collect_delta_all_agents(problem, network, schedule, options)?.into_iter().map(|mut v| v.swap_remove(agent)).collect())
}

/// `[H⁻¹(S₁+S₂)H⁻ᵀ, −(1/n)H⁻¹S₂; −(1/n)S₂H⁻ᵀ, S₂/n²]`.
pub fn theoretical_covariance(data: &NormalityData, agents: usize) -> Result<DMatrix<f64>> {
    let d = data.h.nrows();
    let h_inv = data.h.clone().try_inverse().ok_or_else(|| Error::Numerical {
        message: "H is singular; the limit needs a strongly convex objective".into(),
        last_estimate: data.h.determinant(),
    })?;
    if h_inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical { message: "H is numerically singular".into(), last_estimate: data.h.determinant() });
    }
    let n = agents as f64;
    let top_left = symmetrize(&(&h_inv * (&data.s1 + &data.s2) * h_inv.transpose()));
    let off = -(&h_inv * &data.s2) / n;
    let bottom_right = symmetrize(&data.s2) / (n * n);
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(&top_left);
    out.view_mut((0, d), (d, d)).copy_from(&off);
    out.view_mut((d, 0), (d, d)).copy_from(&off.transpose());
    out.view_mut((d, d), (d, d)).copy_from(&bottom_right);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub samples: usize,
    pub mean: DVector<f64>,
    pub empirical: DMatrix<f64>,
    pub theoretical: DMatrix<f64>,
    /// `‖emp − theo‖_F / ‖theo‖_F`, or `‖emp‖_F` when the theory is zero.
    pub rel_frobenius_error: f64,
    /// Per coordinate of `[top; bottom]`, standardised by the sample
    /// standard deviation; zero for constant coordinates.
    pub skewness: Vec<f64>,
    pub excess_kurtosis: Vec<f64>,
}

impl CovarianceReport {
    /// Largest theoretical standard deviation.
    pub fn max_theoretical_std(&self) -> f64 {
        self.theoretical.diagonal().iter().fold(0.0f64, |m, v| m.max(v.max(0.0).sqrt()))
    }

    /// Key-value CSV rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let _ = writeln!(out, "samples,{}", self.samples);
        let _ = writeln!(out, "rel_frobenius_error,{:.16e}", self.rel_frobenius_error);
        let dim = self.mean.len();
        for r in 0..dim {
            let _ = writeln!(out, "mean_{r},{:.16e}", self.mean[r]);
            let _ = writeln!(out, "skewness_{r},{:.16e}", self.skewness[r]);
            let _ = writeln!(out, "excess_kurtosis_{r},{:.16e}", self.excess_kurtosis[r]);
        }
        for (name, m) in [("empirical", &self.empirical), ("theoretical", &self.theoretical)] {
            for r in 0..dim {
                for c in 0..dim {
                    let _ = writeln!(out, "{name}_{r}_{c},{:.16e}", m[(r, c)]);
                }
            }
        }
        out
    }
}

/// Unbiased sample covariance of `vectors` and its comparison with `theoretical`.
pub fn compare_vectors(vectors: &[DVector<f64>], theoretical: &DMatrix<f64>) -> Result<CovarianceReport> {
    let r = vectors.len();
    if r < MIN_REPLICATIONS {
        return Err(Error::InsufficientData(format!("{r} samples, need at least {MIN_REPLICATIONS}")));
    }
    let dim = theoretical.nrows();
    if vectors.iter().any(|v| v.len() != dim) {
        return config_err("sample dimension does not match the theoretical covariance");
    }
    let mean = vectors.iter().fold(DVector::zeros(dim), |acc, v| acc + v) / r as f64;
    let mut cov = DMatrix::zeros(dim, dim);
    for v in vectors {
        let c = v - &mean;
        cov.ger(1.0, &c, &c, 1.0);
    }
    let empirical = symmetrize(&(cov / (r - 1) as f64));
    let theo_norm = theoretical.norm();
    let diff = (&empirical - theoretical).norm();
    let rel_frobenius_error = if theo_norm > 0.0 { diff / theo_norm } else { diff };
    let mut skewness = Vec::with_capacity(dim);
    let mut excess_kurtosis = Vec::with_capacity(dim);
    for c in 0..dim {
        let sd = empirical[(c, c)].sqrt();
        if sd == 0.0 {
            skewness.push(0.0);
            excess_kurtosis.push(0.0);
            continue;
        }
        let (m3, m4) = vectors.iter().fold((0.0, 0.0), |(a, b), v| {
            let s = (v[c] - mean[c]) / sd;
            (a + s * s * s, b + s * s * s * s)
        });
        skewness.push(m3 / r as f64);
        excess_kurtosis.push(m4 / r as f64 - 3.0);
    }
    Ok(CovarianceReport { samples: r, mean, empirical, theoretical: theoretical.clone(), rel_frobenius_error, skewness, excess_kurtosis })
}

pub fn compare_covariance(samples: &[DeltaSample], theoretical: &DMatrix<f64>) -> Result<CovarianceReport> {
    let vectors: Vec<DVector<f64>> = samples.iter().map(DeltaSample::stacked).collect();
    compare_vectors(&vectors, theoretical)
}

/// Largest pairwise `‖C_a − C_b‖_F / max(‖C_a‖_F, ‖C_b‖_F)`.
pub fn cross_agent_spread(covariances: &[DMatrix<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, ca) in covariances.iter().enumerate() {
        for cb in &covariances[a + 1..] {
            let scale = ca.norm().max(cb.norm());
            if scale > 0.0 {
                worst = worst.max((ca - cb).norm() / scale);
            }
        }
    }
    worst
}

/// One CSV row per sample: `seed,agent,k,top_*,bottom_*`.
pub fn samples_csv(samples: &[DeltaSample]) -> String {
    let d = samples.first().map_or(0, |s| s.top.len());
    let mut out = String::from("seed,agent,k");
    for r in 0..d {
        let _ = write!(out, ",top_{r}");
    }
    for r in 0..d {
        let _ = write!(out, ",bottom_{r}");
    }
    out.push('\n');
    for s in samples {
        let _ = write!(out, "{},{},{}", s.seed, s.agent + 1, s.k);
        for v in s.top.iter().chain(s.bottom.iter()) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}
