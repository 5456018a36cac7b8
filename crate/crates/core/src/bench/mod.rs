//! Monte-Carlo harness: metrics, trials, sweeps and CSV output.

mod metrics;
mod selftest;
mod sweep;
mod trial;


pub use metrics::{channel_nmse, mse, mse_complex, nmse, wrap_angle};
pub use selftest::{selftest, SelfCheck};
pub use sweep::{mean_stderr, sweep, ExperimentPlan, SummaryRow, SweepAxis, SweepResult};
pub use trial::{decompose, Decomposition, run_trial, run_trials, ParamErrors, Solver, TrialData, TrialOutcome, TrialReport};
