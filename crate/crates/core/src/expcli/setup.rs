//! Building problems, networks and schedules from a [`Config`].

use std::path::Path;

use nalgebra::DVector;

use super::config::Config;
use crate::algorithms::{
    asymptotic_schedule, strongly_convex_schedule, Algorithm, BetaRule, DscgdParams, Network, StepSchedule, StepSize,
};
use crate::error::{config_err, Error, Result};
use crate::problems::{
    make_logistic_cso, make_quadratic, make_sigmoid_least_squares, make_sinusoid_maml, LogisticParams, LogisticProblem,
    MamlParams, Problem, QuadraticParams, QuadraticProblem, SigmoidParams, SigmoidProblem, SinusoidMaml,
};
use crate::topology::{generate_ring_plus_random, parse_edge_list, DirectedGraph};

/// Every key the front end understands.
pub const KNOWN_KEYS: &[&str] = &[
    "family", "agents", "dim", "inner_dim", "problem_seed", "noise_inner", "noise_outer", "conditioning",
    "samples_per_agent", "fixed_inner_pool", "tasks_per_agent", "hidden_width", "adapt_step", "batch_size",
    "topology_extra", "topology_seed", "edges_a", "edges_bt", "algorithm", "algorithms", "eta", "gamma", "alpha",
    "alpha_a", "alpha_b", "alpha_exponent", "alpha_horizon", "beta", "beta_value", "beta_scale", "beta_offset",
    "beta_exponent", "iterations", "stride", "seeds", "seed", "x0", "require_metrics", "output", "replications",
    "normality_k", "agent", "threshold", "start",
];

/// A problem of any supported family.
pub enum AnyProblem {
    Quadratic(QuadraticProblem),
    Logistic(LogisticProblem),
    Sigmoid(SigmoidProblem),
    Maml(SinusoidMaml),
}

/// Evaluate `$body` with `$p` bound to the concrete problem.
macro_rules! with_problem {
    ($any:expr, $p:ident => $body:expr) => {
        match $any {
            $crate::expcli::setup::AnyProblem::Quadratic($p) => $body,
            $crate::expcli::setup::AnyProblem::Logistic($p) => $body,
            $crate::expcli::setup::AnyProblem::Sigmoid($p) => $body,
            $crate::expcli::setup::AnyProblem::Maml($p) => $body,
        }
    };
}
pub(crate) use with_problem;

impl AnyProblem {
    pub fn agents(&self) -> usize {
        with_problem!(self, p => p.agents())
    }

    pub fn family(&self) -> &'static str {
        with_problem!(self, p => p.family())
    }
}

pub fn build_problem(cfg: &Config) -> Result<AnyProblem> {
    let family: String = cfg.get_or("family", "quadratic".to_string())?;
    let agents = cfg.get_or("agents", 3usize)?;
    let seed = cfg.get_or("problem_seed", 0u64)?;
    Ok(match family.as_str() {
        "quadratic" => AnyProblem::Quadratic(make_quadratic(&QuadraticParams {
            agents,
            dim: cfg.get_or("dim", 2)?,
            inner_dim: cfg.get("inner_dim")?,
            seed,
            noise_inner: cfg.get_or("noise_inner", 0.0)?,
            noise_outer: cfg.get_or("noise_outer", 0.0)?,
            conditioning: cfg.get_or("conditioning", 4.0)?,
        })?),
        "logistic" => AnyProblem::Logistic(make_logistic_cso(&LogisticParams {
            agents,
            samples_per_agent: cfg.get_or("samples_per_agent", 20)?,
            dim: cfg.get_or("dim", 10)?,
            seed,
            fixed_inner_pool: cfg.get("fixed_inner_pool")?,
        })?),
        "sigmoid" => {
            let dim = cfg.get_or("dim", 5)?;
            AnyProblem::Sigmoid(make_sigmoid_least_squares(&SigmoidParams {
                agents,
                dim,
                inner_dim: cfg.get_or("inner_dim", dim)?,
                seed,
                noise_inner: cfg.get_or("noise_inner", 0.1)?,
                noise_outer: cfg.get_or("noise_outer", 0.1)?,
            })?)
        }
        "maml" => AnyProblem::Maml(make_sinusoid_maml(&MamlParams {
            agents,
            tasks_per_agent: cfg.get_or("tasks_per_agent", 20)?,
            hidden_width: cfg.get_or("hidden_width", 8)?,
            adapt_step: cfg.get_or("adapt_step", 0.01)?,
            batch_size: cfg.get_or("batch_size", 10)?,
            seed,
        })?),
        other => return config_err(format!("unknown family `{other}` (quadratic, logistic, sigmoid, maml)")),
    })
}

fn read_graph(base: &Path, file: &str) -> Result<DirectedGraph> {
    let path = base.join(file);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text)
}

/// `(G_A, G_{Bᵀ})`: edge-list files if given (relative to `base`), otherwise
/// one ring-plus-random graph used for both.
pub fn build_graphs(cfg: &Config, agents: usize, base: &Path) -> Result<(DirectedGraph, DirectedGraph)> {
    let ga = match cfg.raw("edges_a") {
        Some(file) => read_graph(base, file)?,
        None => generate_ring_plus_random(agents, cfg.get_or("topology_extra", 0)?, cfg.get_or("topology_seed", 0)?)?,
    };
    let gbt = match cfg.raw("edges_bt") {
        Some(file) => read_graph(base, file)?,
        None => ga.clone(),
    };
    if ga.n() != agents {
        return config_err(format!("graph has {} nodes, problem has {agents} agents", ga.n()));
    }
    Ok((ga, gbt))
}

pub fn build_network(cfg: &Config, agents: usize, base: &Path) -> Result<Network> {
    let (ga, gbt) = build_graphs(cfg, agents, base)?;
    Network::from_graphs(&ga, &gbt)
}

pub fn build_algorithm(cfg: &Config, id: &str) -> Result<Algorithm> {
    let defaults = DscgdParams::default();
    let params = DscgdParams {
        eta: cfg.scoped_or(Some(id), "eta", defaults.eta)?,
        gamma: cfg.scoped_or(Some(id), "gamma", defaults.gamma)?,
    };
    Algorithm::from_id(id, params)
}

/// Schedule for one algorithm; keys may be scoped as `algorithm.key`.
pub fn build_schedule(cfg: &Config, scope: Option<&str>, problem: &AnyProblem, network: &Network) -> Result<StepSchedule> {
    let n = problem.agents();
    let kind: String = cfg.scoped_or(scope, "alpha", "constant".to_string())?;
    let get = |key: &str, default: f64| cfg.scoped_or(scope, key, default);
    if kind == "strongly-convex" || kind == "asymptotic" {
        let AnyProblem::Quadratic(q) = problem else {
            return config_err(format!("alpha = {kind} needs the quadratic family"));
        };
        let (mu, l, uv) = (q.strong_convexity(), q.smoothness(), network.weights().uv());
        return if kind == "strongly-convex" {
            strongly_convex_schedule(mu, l, uv, n)
        } else {
            asymptotic_schedule(mu, l, uv, n, get("alpha_exponent", 0.7)?)
        };
    }
    let alpha = match kind.as_str() {
        "constant" => StepSize::Constant(get("alpha_a", 0.01)?),
        "sqrtk" => {
            let horizon = match cfg.scoped::<usize>(scope, "alpha_horizon")? {
                Some(h) => h,
                None => cfg.require("iterations")?,
            };
            StepSize::ConstantSqrtK { a: get("alpha_a", 1.0)?, horizon }
        }
        "polynomial" => StepSize::Polynomial {
            a: get("alpha_a", 0.01)?,
            b: get("alpha_b", 0.0)?,
            exponent: get("alpha_exponent", 0.55)?,
        },
        other => {
            return config_err(format!(
                "unknown alpha `{other}` (constant, sqrtk, polynomial, strongly-convex, asymptotic)"
            ))
        }
    };
    let beta_kind: String = cfg.scoped_or(scope, "beta", "proportional".to_string())?;
    let beta = match beta_kind.as_str() {
        "proportional" => BetaRule::Proportional(get("beta_value", 1.0 / n as f64)?),
        "constant" => BetaRule::Constant(get("beta_value", 0.8)?),
        "polynomial" => BetaRule::Polynomial {
            scale: get("beta_scale", 0.8)?,
            offset: get("beta_offset", 0.0)?,
            exponent: get("beta_exponent", 0.6)?,
        },
        other => return config_err(format!("unknown beta `{other}` (proportional, constant, polynomial)")),
    };
    StepSchedule::new(alpha, beta)
}

/// Shared starting point: the seeded network for MAML unless `x0` is given,
/// otherwise every coordinate set to `x0` (default 0).
pub fn initial_points(cfg: &Config, problem: &AnyProblem) -> Result<Vec<DVector<f64>>> {
    let n = problem.agents();
    let fill: Option<f64> = cfg.get("x0")?;
    let x = match (problem, fill) {
        (AnyProblem::Maml(p), None) => p.initial_params().clone(),
        (p, fill) => DVector::from_element(with_problem!(p, q => q.dim()), fill.unwrap_or(0.0)),
    };
    Ok(vec![x; n])
}

/// Check that the problem can supply every metric listed in
/// `require_metrics`.
pub fn check_required_metrics(cfg: &Config, problem: &AnyProblem) -> Result<()> {
    let caps = with_problem!(problem, p => p.capabilities());
    for metric in cfg.list("require_metrics").unwrap_or_default() {
        let ok = match metric.as_str() {
            "k" | "alpha_k" | "beta_k" | "consensus_err" => true,
            "tracking_err" => caps.true_g,
            "grad_norm_sq" => caps.true_grad,
            "opt_gap_avg" | "residual_avg" => caps.optimum,
            other => return config_err(format!("unknown metric `{other}`")),
        };
        if !ok {
            return Err(Error::Config(format!("family `{}` cannot provide `{metric}`", problem.family())));
        }
    }
    Ok(())
}
