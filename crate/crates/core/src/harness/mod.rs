//! Experiment configuration, fitness evaluation, multi-run campaigns and reports.

pub mod config;
pub mod experiment;
pub mod fitness;
pub mod report;

pub use config::{ExperimentConfig, ReadoutKind, Task};
pub use experiment::{
    run_experiment, run_single, Aggregate, ExperimentReport, RunResult, RunStatus,
};
pub use fitness::{make_fitness_fn, CandidateEvaluator, FittedReadout, TestOutcome};
pub use report::emit_report;
