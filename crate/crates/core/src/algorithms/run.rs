//! Multi-round driver shared by all methods.

use nalgebra::{DMatrix, DVector};

use super::ab_dscsc::{ab_dscsc_init, ab_dscsc_step};
use super::dscgd::{dscgd_step, DscgdParams};
use super::schedule::StepSchedule;
use super::scgd::{scgd_round, scsc_round, single_agent_init};
use super::state::NetworkState;
use crate::error::{config_err, Error, Result};
use crate::linalg::{sparse_rows, SparseRows};
use crate::metrics::{metric_row, MetricRow};
use crate::problems::{Centralized, Problem};
use crate::rng::RngStreams;
use crate::topology::{build_weight_pair, underlying_metropolis, DirectedGraph, WeightPair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    AbDscsc,
    Scgd,
    Scsc,
    GpDscgd(DscgdParams),
    GtDscgd(DscgdParams),
}

impl Algorithm {
    pub const IDS: [&'static str; 5] = ["ab-dscsc", "scgd", "scsc", "gp-dscgd", "gt-dscgd"];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::AbDscsc => "ab-dscsc",
            Algorithm::Scgd => "scgd",
            Algorithm::Scsc => "scsc",
            Algorithm::GpDscgd(_) => "gp-dscgd",
            Algorithm::GtDscgd(_) => "gt-dscgd",
        }
    }

    /// `params` is used only by the distributed SGD baselines.
    pub fn from_id(id: &str, params: DscgdParams) -> Result<Self> {
        Ok(match id {
            "ab-dscsc" => Algorithm::AbDscsc,
            "scgd" => Algorithm::Scgd,
            "scsc" => Algorithm::Scsc,
            "gp-dscgd" => Algorithm::GpDscgd(params),
            "gt-dscgd" => Algorithm::GtDscgd(params),
            other => return config_err(format!("unknown algorithm '{other}', expected one of {:?}", Self::IDS)),
        })
    }

    /// Single-agent methods run on the stacked problem.
    pub fn is_centralized(&self) -> bool {
        matches!(self, Algorithm::Scgd | Algorithm::Scsc)
    }
}

/// Communication matrices: the push-pull pair and the symmetric doubly
/// stochastic matrix used by the distributed SGD baselines.
#[derive(Debug, Clone)]
pub struct Network {
    weights: WeightPair,
    mixing: DMatrix<f64>,
    a_rows: SparseRows,
    b_rows: SparseRows,
    w_rows: SparseRows,
}

impl Network {
    pub fn new(weights: WeightPair, mixing: DMatrix<f64>) -> Self {
        let a_rows = sparse_rows(&weights.a);
        let b_rows = sparse_rows(&weights.b);
        let w_rows = sparse_rows(&mixing);
        Self { weights, mixing, a_rows, b_rows, w_rows }
    }

    /// `A` on `G_A`, `B` on `G_{Bᵀ}` and Metropolis weights on the underlying
    /// undirected graph of `G_A`.
    pub fn from_graphs(ga: &DirectedGraph, gbt: &DirectedGraph) -> Result<Self> {
        Ok(Self::new(build_weight_pair(ga, gbt)?, underlying_metropolis(ga)))
    }

    pub fn agents(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &WeightPair {
        &self.weights
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Number of rounds `K`.
    pub iterations: usize,
    /// Metric rows are recorded at `k = 1, 1 + stride, …` up to `K + 1`.
    pub stride: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Diverged { k: usize, agent: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: &'static str,
    pub options: RunOptions,
    pub rows: Vec<MetricRow>,
    pub status: RunStatus,
    /// First `k` at which `β_k` exceeded 1 and was clamped.
    pub beta_clamped_from: Option<usize>,
    pub final_state: NetworkState,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    /// Values of one column, paired with `k`, skipping missing cells.
    pub fn column(&self, name: &str) -> (Vec<f64>, Vec<f64>) {
        self.rows.iter().filter_map(|r| r.get(name).map(|v| (r.k as f64, v))).unzip()
    }
}

/// Run `K` rounds without observing intermediate states.
pub fn run<P: Problem>(
    algorithm: &Algorithm,
    problem: &P,
    network: &Network,
    schedule: &StepSchedule,
    x0: &[DVector<f64>],
    options: &RunOptions,
) -> Result<RunRecord> {
    run_observed(algorithm, problem, network, schedule, x0, options, &mut |_| {})
}

/// Run `K` rounds, calling `observer` on the state after initialisation and
/// after every round. Divergence ends the run early with a
/// [`RunStatus::Diverged`] record; other failures are errors.
pub fn run_observed<P: Problem>(
    algorithm: &Algorithm,
    problem: &P,
    network: &Network,
    schedule: &StepSchedule,
    x0: &[DVector<f64>],
    options: &RunOptions,
    observer: &mut dyn FnMut(&NetworkState),
) -> Result<RunRecord> {
    let n = problem.agents();
    if options.iterations == 0 || options.stride == 0 {
        return config_err("iterations and stride must be at least 1");
    }
    if network.agents() != n {
        return config_err(format!("network has {} agents, problem has {n}", network.agents()));
    }
    if x0.len() != n {
        return config_err(format!("expected {n} initial points, got {}", x0.len()));
    }
    schedule.validate()?;
    let streams = RngStreams::new(options.seed);
    let stacked = Centralized::new(problem);
    let ones = DVector::from_element(n, 1.0);
    let u = match algorithm {
        Algorithm::AbDscsc => &network.weights.u,
        _ => &ones,
    };
    let step_label = |k: usize| match algorithm {
        Algorithm::GpDscgd(p) | Algorithm::GtDscgd(p) => p.eta * schedule.beta(k),
        _ => schedule.alpha(k),
    };
    let row = |state: &NetworkState| {
        let k = state.k;
        if algorithm.is_centralized() {
            let xs = vec![state.x[0].clone(); n];
            let zs = stacked.split(&state.z[0]);
            metric_row(k, step_label(k), schedule.beta(k), &xs, &zs, u, problem)
        } else {
            metric_row(k, step_label(k), schedule.beta(k), &state.x, &state.z, u, problem)
        }
    };

    let init = if algorithm.is_centralized() {
        let mean = x0.iter().fold(DVector::zeros(problem.dim()), |acc, x| acc + x) / n as f64;
        single_agent_init(&stacked, &mean, &streams)
    } else {
        ab_dscsc_init(problem, x0, &streams)
    };
    let mut state = match init {
        Ok(s) => s,
        Err(Error::Divergence { k, agent }) => {
            let empty = NetworkState { k: 1, x: x0.to_vec(), z: vec![], y: vec![], h_prev: vec![] };
            return Ok(RunRecord {
                algorithm: algorithm.id(),
                options: *options,
                rows: vec![],
                status: RunStatus::Diverged { k, agent },
                beta_clamped_from: None,
                final_state: empty,
            });
        }
        Err(e) => return Err(e),
    };
    observer(&state);

    let mut rows = Vec::with_capacity(options.iterations / options.stride + 1);
    let mut status = RunStatus::Completed;
    let mut beta_clamped_from = None;
    for k in 1..=options.iterations {
        if (k - 1) % options.stride == 0 {
            rows.push(row(&state));
        }
        let alpha = schedule.alpha(k);
        let beta = schedule.beta(k);
        if beta_clamped_from.is_none() && schedule.beta_raw(k) > 1.0 {
            beta_clamped_from = Some(k);
        }
        let result = match algorithm {
            Algorithm::AbDscsc => {
                ab_dscsc_step(&mut state, problem, &network.a_rows, &network.b_rows, alpha, beta, &streams)
            }
            Algorithm::Scgd => scgd_round(&mut state, &stacked, alpha, beta, &streams),
            Algorithm::Scsc => scsc_round(&mut state, &stacked, alpha, beta, &streams),
            Algorithm::GpDscgd(p) => dscgd_step(&mut state, problem, &network.w_rows, *p, beta, false, &streams),
            Algorithm::GtDscgd(p) => dscgd_step(&mut state, problem, &network.w_rows, *p, beta, true, &streams),
        };
        match result {
            Ok(()) => observer(&state),
            Err(Error::Divergence { k, agent }) => {
                status = RunStatus::Diverged { k, agent };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if status == RunStatus::Completed && options.iterations.is_multiple_of(options.stride) {
        rows.push(row(&state));
    }
    Ok(RunRecord { algorithm: algorithm.id(), options: *options, rows, status, beta_clamped_from, final_state: state })
}
