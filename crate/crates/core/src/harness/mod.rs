//! Configuration-driven experiments.
//!
//! Each experiment family sweeps one variable (`p`, `f`, `beta` or region
//! size) over a number of seeded repetitions and emits a results CSV plus a
//! per-sweep-value summary with mean and sample standard deviation.

mod config;
mod runner;

pub use config::{ExperimentConfig, ExperimentKind, SweepVar, THREADS_ENV};
pub use runner::{
    expected_neighborhood, mean_stddev, params_for, run_experiment, run_on_layout, run_once, ExperimentOutput,
    RunOutcome, RunParams, RunRecord, RunRow, SummaryRow,
};
