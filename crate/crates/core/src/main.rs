use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dscsc::expcli::{cmd_normality, cmd_run, cmd_sweep, cmd_validate_topology, exit_code, load, CliOptions};

#[derive(Parser)]
#[command(name = "dscsc", version, about = "Distributed stochastic compositional optimization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true, default_value = "experiment.cfg")]
    config: PathBuf,
    /// Use this single seed instead of the configured seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum number of parallel runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run one algorithm for every configured seed.
    Run,
    /// Check the network assumption and print the weight pair.
    ValidateTopology,
    /// Compare replicated averaged deviations with the limiting covariance.
    Normality,
    /// Run several algorithms for every configured seed.
    Sweep,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let options = CliOptions { config: cli.config, seed: cli.seed, jobs: cli.jobs, out: cli.out };
    let mut stdout = std::io::stdout().lock();
    let result = load(&options).and_then(|loaded| match cli.command {
        Command::Run => cmd_run(&loaded, &mut stdout),
        Command::ValidateTopology => cmd_validate_topology(&loaded, &mut stdout),
        Command::Normality => cmd_normality(&loaded, &mut stdout),
        Command::Sweep => cmd_sweep(&loaded, &mut stdout),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
