use std::path::Path;
use std::process::{Command, Output};

use dscsc::expcli::parse_rows;

fn dscsc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dscsc"))
        .args(args)
        .arg("--config")
        .arg(dir.join("exp.cfg"))
        .output()
        .expect("binary runs")
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.cfg"), config).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MINIMAL: &str = "family = quadratic\nagents = 2\ndim = 2\nnoise_inner = 0.1\nnoise_outer = 0.1\n\
alpha = constant\nalpha_a = 0.05\niterations = 10\nstride = 2\nseeds = 4\noutput = out\n";

#[test]
fn minimal_run_writes_round_trippable_csv() {
    let dir = setup(MINIMAL);
    let o = dscsc(dir.path(), &["run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/ab-dscsc_seed4.csv")).unwrap();
    let (header, rows) = parse_rows(&text).unwrap();
    assert_eq!(rows.len(), 10 / 2 + 1);
    assert!(rows.windows(2).all(|w| w[0].k < w[1].k));
    assert!(header.iter().any(|h| h == "agents = 2"));
    assert!(header.iter().any(|h| h == "seed = 4"));
    assert!(header.iter().any(|h| h == "status = completed"));
    assert!(rows.iter().all(|r| r.opt_gap_avg.is_some() && r.tracking_err.is_some()));
    let agg = std::fs::read_to_string(dir.path().join("out/ab-dscsc_aggregate.csv")).unwrap();
    assert_eq!(parse_rows(&agg).unwrap().1, rows);
}

#[test]
fn rerun_is_identical_except_wall_clock() {
    let dir = setup(MINIMAL);
    let read = || {
        assert_eq!(dscsc(dir.path(), &["run"]).status.code(), Some(0));
        std::fs::read_to_string(dir.path().join("out/ab-dscsc_seed4.csv"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# wall_clock_seconds"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(read(), read());
}

#[test]
fn seed_and_out_flags_override_config() {
    let dir = setup(MINIMAL);
    let out = dir.path().join("elsewhere");
    let o = dscsc(dir.path(), &["run", "--seed", "9", "--jobs", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("ab-dscsc_seed9.csv").exists());
}

#[test]
fn invalid_configs_exit_2() {
    for cfg in [
        "family = cubic\niterations = 5\n",
        "iterations = 5\nunknown_key = 1\n",
        "agents = 2\n",
        "agents = 2\niterations = 5\nbeta = constant\nbeta_value = -1\n",
        "family = maml\nagents = 2\ntasks_per_agent = 2\nhidden_width = 2\niterations = 5\nrequire_metrics = opt_gap_avg\n",
    ] {
        let dir = setup(cfg);
        let o = dscsc(dir.path(), &["run"]);
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", stderr(&o));
        assert!(stderr(&o).contains("error"));
    }
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dscsc(dir.path(), &["run"]).status.code(), Some(2));
}

#[test]
fn clamped_beta_is_recorded() {
    let dir = setup(&format!("{MINIMAL}beta = constant\nbeta_value = 1.5\n"));
    assert_eq!(dscsc(dir.path(), &["run"]).status.code(), Some(0));
    let (header, rows) = parse_rows(&std::fs::read_to_string(dir.path().join("out/ab-dscsc_seed4.csv")).unwrap()).unwrap();
    assert!(header.iter().any(|h| h == "beta_clamped_from = 1"));
    assert!(rows.iter().all(|r| r.beta_k == 1.0));
}

#[test]
fn divergence_exits_3_and_keeps_partial_csv() {
    let dir = setup(
        "family = quadratic\nagents = 2\ndim = 2\nalpha = constant\nalpha_a = 50\nx0 = 1\niterations = 1000\noutput = out\n",
    );
    let o = dscsc(dir.path(), &["run"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/ab-dscsc_seed0.csv")).unwrap();
    let (header, rows) = parse_rows(&text).unwrap();
    assert!(header.iter().any(|h| h.starts_with("status = diverged@")));
    assert!(!rows.is_empty() && rows.len() < 1001);
}

#[test]
fn assumption_violation_exits_1_before_running() {
    let dir = setup("agents = 2\niterations = 5\nedges_a = a.txt\noutput = out\n");
    std::fs::write(dir.path().join("a.txt"), "2\n").unwrap();
    let o = dscsc(dir.path(), &["run"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn sweep_writes_every_algorithm() {
    let dir = setup(&format!("{MINIMAL}algorithms = ab-dscsc, scgd, scsc, gp-dscgd, gt-dscgd\nseeds = 1, 2\n").replace("seeds = 4\n", ""));
    let o = dscsc(dir.path(), &["sweep", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for alg in ["ab-dscsc", "scgd", "scsc", "gp-dscgd", "gt-dscgd"] {
        for s in [1, 2] {
            assert!(dir.path().join(format!("out/{alg}_seed{s}.csv")).exists());
        }
        assert!(dir.path().join(format!("out/{alg}_aggregate.csv")).exists());
    }
}

#[test]
fn constant_schedule_sigmoid_run() {
    let dir = setup(
        "family = sigmoid\nagents = 5\nalpha = constant\nalpha_a = 0.01\nbeta = constant\nbeta_value = 0.8\n\
         topology_extra = 3\niterations = 5000\nstride = 500\noutput = out\n",
    );
    let o = dscsc(dir.path(), &["run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = parse_rows(&std::fs::read_to_string(dir.path().join("out/ab-dscsc_seed0.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.beta_k == 0.8 && r.alpha_k == 0.01));
    assert!(rows[10].grad_norm_sq.unwrap() < rows[0].grad_norm_sq.unwrap());
}

#[test]
fn validate_ring_and_degenerate_topologies() {
    let dir = setup("agents = 3\n");
    let o = dscsc(dir.path(), &["validate-topology"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("tau_a = 0.500000") && out.contains("tau_b = 0.500000"), "{out}");

    let dir = setup("agents = 1\n");
    let o = dscsc(dir.path(), &["validate-topology"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("tau_a = 0.000000"));

    let dir = setup("agents = 2\nedges_a = loops.txt\n");
    std::fs::write(dir.path().join("loops.txt"), "2\n1 1\n2 2\n").unwrap();
    let o = dscsc(dir.path(), &["validate-topology"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no spanning tree"), "{}", stderr(&o));
    assert!(stdout(&o).contains("spanning_tree_a = false"));
}

#[test]
fn normality_guards() {
    let dir = setup("agents = 3\nalpha = polynomial\nalpha_exponent = 0.7\nreplications = 10\nnormality_k = 100\n");
    let o = dscsc(dir.path(), &["normality"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("insufficient data"));

    let dir = setup("family = sigmoid\nagents = 3\nreplications = 60\n");
    assert_eq!(dscsc(dir.path(), &["normality"]).status.code(), Some(2));

    let dir = setup("agents = 3\nalpha = constant\nreplications = 60\n");
    assert_eq!(dscsc(dir.path(), &["normality"]).status.code(), Some(2));
}

#[test]
fn normality_writes_report() {
    let dir = setup(
        "agents = 3\ndim = 2\nnoise_inner = 0.2\nnoise_outer = 0.2\nproblem_seed = 0\nalpha = polynomial\n\
         alpha_a = 0.5\nalpha_exponent = 0.7\nreplications = 60\nnormality_k = 200\nthreshold = 100\noutput = out\n",
    );
    let o = dscsc(dir.path(), &["normality"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("out/normality_report.csv")).unwrap();
    assert!(report.contains("rel_frobenius_error,"));
    let samples = std::fs::read_to_string(dir.path().join("out/normality_samples.csv")).unwrap();
    assert_eq!(samples.lines().filter(|l| !l.starts_with('#')).count(), 61);

    std::fs::write(dir.path().join("exp.cfg"), std::fs::read_to_string(dir.path().join("exp.cfg")).unwrap().replace("threshold = 100", "threshold = 0")).unwrap();
    assert_eq!(dscsc(dir.path(), &["normality"]).status.code(), Some(1));
}

#[test]
fn shipped_configs_load_and_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["quadratic.cfg", "logistic_sweep.cfg", "normality.cfg", "maml.cfg"] {
        let o = Command::new(env!("CARGO_BIN_EXE_dscsc"))
            .args(["validate-topology", "--config"])
            .arg(root.join(name))
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
}
