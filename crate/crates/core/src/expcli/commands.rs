//! The four subcommands. Each returns an exit code on success and an
//! [`Error`] otherwise; [`exit_code`] maps errors to codes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::Config;
use super::csv::write_rows;
use super::setup::{
    build_algorithm, build_graphs, build_network, build_problem, build_schedule, check_required_metrics,
    initial_points, with_problem, AnyProblem, KNOWN_KEYS,
};
use crate::algorithms::{run, Algorithm, Network, RunOptions, RunRecord, RunStatus};
use crate::error::{config_err, Error, Result};
use crate::metrics::MetricRow;
use crate::normality::{
    collect_delta, compare_covariance, samples_csv, theoretical_covariance, NormalityOptions, MIN_REPLICATIONS,
};
use crate::problems::Problem;
use crate::topology::{assumption2_violation, DirectedGraph};

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct CliOptions {
    pub config: PathBuf,
    /// Replaces `seeds`/`seed` from the config.
    pub seed: Option<u64>,
    /// Worker-thread bound; all cores if `None`.
    pub jobs: Option<usize>,
    /// Replaces `output` from the config.
    pub out: Option<PathBuf>,
}

/// A loaded configuration with the directory relative paths resolve against.
pub struct Loaded {
    pub config: Config,
    pub base: PathBuf,
    pub options: CliOptions,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Assumption(_) => 1,
        Error::Divergence { .. } => 3,
        _ => 2,
    }
}

pub fn load(options: &CliOptions) -> Result<Loaded> {
    let text = std::fs::read_to_string(&options.config)
        .map_err(|e| Error::Config(format!("{}: {e}", options.config.display())))?;
    let config = Config::parse(&text)?;
    config.reject_unknown(KNOWN_KEYS)?;
    let base = options.config.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, base, options: options.clone() })
}

impl Loaded {
    fn output_dir(&self) -> Result<PathBuf> {
        let dir = match &self.options.out {
            Some(d) => d.clone(),
            None => self.base.join(self.config.raw("output").unwrap_or("out")),
        };
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn seeds(&self) -> Result<Vec<u64>> {
        if let Some(s) = self.options.seed {
            return Ok(vec![s]);
        }
        if let Some(list) = self.config.list("seeds") {
            let seeds: Vec<u64> = list
                .iter()
                .map(|s| s.parse().map_err(|_| Error::Config(format!("bad seed `{s}`"))))
                .collect::<Result<_>>()?;
            if seeds.is_empty() {
                return config_err("seeds is empty");
            }
            return Ok(seeds);
        }
        Ok(vec![self.config.get_or("seed", 0)?])
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.options.jobs {
            if j == 0 {
                return config_err("--jobs must be at least 1");
            }
            b = b.num_threads(j);
        }
        b.build().map_err(|e| Error::Config(e.to_string()))
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn status_text(status: RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".into(),
        RunStatus::Diverged { k, agent } => format!("diverged@{k} (agent {agent})"),
    }
}

/// Per-k means over the runs that recorded that k. An optional column is
/// kept only where every contributing run has it.
pub fn aggregate_rows(records: &[&[MetricRow]]) -> Vec<MetricRow> {
    let longest = records.iter().map(|r| r.len()).max().unwrap_or(0);
    (0..longest)
        .map(|i| {
            let rows: Vec<&MetricRow> = records.iter().filter_map(|r| r.get(i)).collect();
            let c = rows.len() as f64;
            let mean = |f: &dyn Fn(&MetricRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / c;
            let opt_mean = |f: &dyn Fn(&MetricRow) -> Option<f64>| {
                rows.iter().map(|r| f(r)).sum::<Option<f64>>().map(|s| s / c)
            };
            MetricRow {
                k: rows[0].k,
                alpha_k: mean(&|r| r.alpha_k),
                beta_k: mean(&|r| r.beta_k),
                consensus_err: mean(&|r| r.consensus_err),
                tracking_err: opt_mean(&|r| r.tracking_err),
                grad_norm_sq: opt_mean(&|r| r.grad_norm_sq),
                opt_gap_avg: opt_mean(&|r| r.opt_gap_avg),
                residual_avg: opt_mean(&|r| r.residual_avg),
            }
        })
        .collect()
}

/// Everything needed to launch runs, validated up front.
struct Prepared {
    problem: AnyProblem,
    network: Network,
    x0: Vec<nalgebra::DVector<f64>>,
    runs: Vec<(Algorithm, crate::algorithms::StepSchedule)>,
}

fn prepare(loaded: &Loaded, algorithms: &[String]) -> Result<Prepared> {
    let cfg = &loaded.config;
    let problem = build_problem(cfg)?;
    check_required_metrics(cfg, &problem)?;
    let (ga, gbt) = build_graphs(cfg, problem.agents(), &loaded.base)?;
    if let Some(clause) = assumption2_violation(&ga, &gbt) {
        return Err(Error::Assumption(clause));
    }
    let network = Network::from_graphs(&ga, &gbt)?;
    let x0 = initial_points(cfg, &problem)?;
    let runs = algorithms
        .iter()
        .map(|id| Ok((build_algorithm(cfg, id)?, build_schedule(cfg, Some(id), &problem, &network)?)))
        .collect::<Result<_>>()?;
    Ok(Prepared { problem, network, x0, runs })
}

/// Result of `run` or `sweep`: the files written and any divergence.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub diverged: Option<(String, u64, usize, usize)>,
}

fn execute(loaded: &Loaded, algorithms: &[String]) -> Result<RunSummary> {
    let cfg = &loaded.config;
    let iterations: usize = cfg.require("iterations")?;
    let stride: usize = cfg.get_or("stride", 1)?;
    let seeds = loaded.seeds()?;
    let prepared = prepare(loaded, algorithms)?;
    let dir = loaded.output_dir()?;
    let jobs: Vec<(usize, u64)> =
        (0..prepared.runs.len()).flat_map(|a| seeds.iter().map(move |&s| (a, s))).collect();

    let run_one = |&(a, seed): &(usize, u64)| -> Result<(usize, u64, RunRecord, PathBuf)> {
        let (algorithm, schedule) = &prepared.runs[a];
        let options = RunOptions { iterations, stride, seed };
        let start = Instant::now();
        let record = with_problem!(&prepared.problem, p => run(algorithm, p, &prepared.network, schedule, &prepared.x0, &options))?;
        let elapsed = start.elapsed().as_secs_f64();
        let mut header = vec![cfg.text().trim_end().to_string()];
        header.push(format!("algorithm = {}", algorithm.id()));
        header.push(format!("seed = {seed}"));
        header.push(format!("status = {}", status_text(record.status)));
        if let Some(k) = record.beta_clamped_from {
            header.push(format!("beta_clamped_from = {k}"));
        }
        header.push(format!("wall_clock_seconds = {elapsed:.3}"));
        let path = dir.join(format!("{}_seed{seed}.csv", algorithm.id()));
        write_file(&path, &write_rows(&header, &record.rows))?;
        Ok((a, seed, record, path))
    };
    let results: Vec<_> = loaded.pool()?.install(|| jobs.par_iter().map(run_one).collect::<Result<Vec<_>>>())?;

    let mut files: Vec<PathBuf> = results.iter().map(|r| r.3.clone()).collect();
    let mut diverged = None;
    for (a, (algorithm, _)) in prepared.runs.iter().enumerate() {
        let mine: Vec<&(usize, u64, RunRecord, PathBuf)> = results.iter().filter(|r| r.0 == a).collect();
        let rows: Vec<&[MetricRow]> = mine.iter().map(|r| r.2.rows.as_slice()).collect();
        let mut header = vec![cfg.text().trim_end().to_string()];
        header.push(format!("algorithm = {}", algorithm.id()));
        header.push(format!("seeds = {}", seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")));
        let path = dir.join(format!("{}_aggregate.csv", algorithm.id()));
        write_file(&path, &write_rows(&header, &aggregate_rows(&rows)))?;
        files.push(path);
        if diverged.is_none() {
            diverged = mine.iter().find_map(|r| match r.2.status {
                RunStatus::Diverged { k, agent } => Some((algorithm.id().to_string(), r.1, k, agent)),
                RunStatus::Completed => None,
            });
        }
    }
    Ok(RunSummary { files, diverged })
}

fn finish_runs(summary: RunSummary, out: &mut dyn std::io::Write) -> Result<u8> {
    for f in &summary.files {
        let _ = writeln!(out, "wrote {}", f.display());
    }
    match summary.diverged {
        Some((_, _, k, agent)) => Err(Error::Divergence { k, agent }),
        None => Ok(0),
    }
}

/// `run`: one algorithm (`algorithm`, default `ab-dscsc`) for every seed.
pub fn cmd_run(loaded: &Loaded, out: &mut dyn std::io::Write) -> Result<u8> {
    let id: String = loaded.config.get_or("algorithm", "ab-dscsc".to_string())?;
    finish_runs(execute(loaded, &[id])?, out)
}

/// `sweep`: every algorithm in `algorithms` (default: all five) for every seed.
pub fn cmd_sweep(loaded: &Loaded, out: &mut dyn std::io::Write) -> Result<u8> {
    let ids = loaded
        .config
        .list("algorithms")
        .unwrap_or_else(|| Algorithm::IDS.iter().map(|s| s.to_string()).collect());
    if ids.is_empty() {
        return config_err("algorithms is empty");
    }
    finish_runs(execute(loaded, &ids)?, out)
}

fn format_vector(v: &nalgebra::DVector<f64>) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

fn format_nodes(nodes: &[usize]) -> String {
    if nodes.is_empty() {
        return "none".into();
    }
    nodes.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

/// Topology report. The weight pair is printed only when the assumption holds.
pub fn topology_report(ga: &DirectedGraph, gbt: &DirectedGraph) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "n = {}", ga.n());
    let _ = writeln!(s, "edges_a = {}", ga.edge_count());
    let _ = writeln!(s, "edges_bt = {}", gbt.edge_count());
    let _ = writeln!(s, "spanning_tree_a = {}", ga.has_spanning_tree());
    let _ = writeln!(s, "spanning_tree_bt = {}", gbt.has_spanning_tree());
    let (ra, rb) = (ga.roots(), gbt.roots());
    let common: Vec<usize> = ra.iter().copied().filter(|r| rb.contains(r)).collect();
    let _ = writeln!(s, "roots_a = {}", format_nodes(&ra));
    let _ = writeln!(s, "roots_bt = {}", format_nodes(&rb));
    let _ = writeln!(s, "common_roots = {}", format_nodes(&common));
    if assumption2_violation(ga, gbt).is_none() {
        let w = Network::from_graphs(ga, gbt)?;
        let w = w.weights();
        let _ = writeln!(s, "u = {}", format_vector(&w.u));
        let _ = writeln!(s, "v = {}", format_vector(&w.v));
        let _ = writeln!(s, "tau_a = {:.6}", w.tau_a);
        let _ = writeln!(s, "tau_b = {:.6}", w.tau_b);
    }
    Ok(s)
}

/// `validate-topology`: report, then fail with the violated clause if any.
pub fn cmd_validate_topology(loaded: &Loaded, out: &mut dyn std::io::Write) -> Result<u8> {
    let agents: usize = loaded.config.get_or("agents", 3)?;
    let (ga, gbt) = build_graphs(&loaded.config, agents, &loaded.base)?;
    let _ = write!(out, "{}", topology_report(&ga, &gbt)?);
    match assumption2_violation(&ga, &gbt) {
        Some(clause) => Err(Error::Assumption(clause)),
        None => Ok(0),
    }
}

/// `normality`: replicated AB-DSCSC runs on a quadratic instance. Exit code 1
/// if the relative Frobenius error exceeds `threshold`.
pub fn cmd_normality(loaded: &Loaded, out: &mut dyn std::io::Write) -> Result<u8> {
    let cfg = &loaded.config;
    let problem = build_problem(cfg)?;
    let AnyProblem::Quadratic(q) = &problem else {
        return config_err("normality needs the quadratic family");
    };
    let replications: usize = cfg.get_or("replications", 200)?;
    if replications < MIN_REPLICATIONS {
        return Err(Error::InsufficientData(format!(
            "{replications} replications, at least {MIN_REPLICATIONS} needed"
        )));
    }
    let agent: usize = cfg.get_or("agent", 0)?;
    let threshold: f64 = cfg.get_or("threshold", 0.3)?;
    let network = build_network(cfg, q.agents(), &loaded.base)?;
    let schedule = build_schedule(cfg, Some("ab-dscsc"), &problem, &network)?;
    let start = match cfg.raw("start").unwrap_or("optimum") {
        "optimum" => None,
        "x0" => Some(initial_points(cfg, &problem)?.swap_remove(0)),
        other => return config_err(format!("unknown start `{other}` (optimum, x0)")),
    };
    let options = NormalityOptions {
        replications,
        k: cfg.get_or("normality_k", 20_000)?,
        base_seed: match loaded.options.seed {
            Some(s) => s,
            None => cfg.get_or("seed", 0)?,
        },
        start,
    };
    let samples = loaded.pool()?.install(|| collect_delta(q, &network, &schedule, &options, agent))?;
    let data = q.normality_data().ok_or(Error::Capability("normality data"))?;
    let theory = theoretical_covariance(data, q.agents())?;
    let report = compare_covariance(&samples, &theory)?;

    let dir = loaded.output_dir()?;
    let header: String = cfg.text().lines().map(|l| format!("# {l}\n")).collect::<String>()
        + "# S1 is the sum over agents of the per-agent gradient-noise covariances\n";
    let sample_path = dir.join("normality_samples.csv");
    let report_path = dir.join("normality_report.csv");
    write_file(&sample_path, &(header.clone() + &samples_csv(&samples)))?;
    write_file(&report_path, &(header + &report.to_csv()))?;
    let _ = writeln!(out, "wrote {}", sample_path.display());
    let _ = writeln!(out, "wrote {}", report_path.display());
    let _ = writeln!(out, "rel_frobenius_error = {:.6} (threshold {threshold})", report.rel_frobenius_error);
    Ok(if report.rel_frobenius_error <= threshold { 0 } else { 1 })
}
