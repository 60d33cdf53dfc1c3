//! Step functions for the push-pull method and its baselines, and a run
//! driver that records metrics.

mod ab_dscsc;
mod dscgd;
mod run;
mod schedule;
mod scgd;
mod state;

pub use ab_dscsc::{ab_dscsc_init, ab_dscsc_step};
pub use dscgd::{dscgd_step, gp_dscgd_step, gt_dscgd_step, DscgdParams};
pub use run::{run, run_observed, Algorithm, Network, RunOptions, RunRecord, RunStatus};
pub use schedule::{asymptotic_schedule, strongly_convex_schedule, BetaRule, StepSchedule, StepSize};
pub use scgd::{scgd_round, scgd_step, scsc_round, scsc_step, single_agent_init};
pub use state::{averaged_inner, corrected_inner, NetworkState, DIVERGENCE_THRESHOLD};
