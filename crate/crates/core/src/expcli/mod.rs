//! Configuration-driven front end: flat `key = value` configs, metric CSVs
//! and the `run`, `sweep`, `validate-topology` and `normality` commands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod setup;

pub use commands::{
    aggregate_rows, cmd_normality, cmd_run, cmd_sweep, cmd_validate_topology, exit_code, load, topology_report,
    CliOptions, Loaded, RunSummary,
};
pub use config::Config;
pub use csv::{parse_rows, write_rows};
pub use setup::{build_network, build_problem, build_schedule, initial_points, AnyProblem, KNOWN_KEYS};
