//! Independent seeded runs of one configuration, with aggregate statistics.

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::Result;
use crate::lstm::MemoryCellChromosome;
use crate::neuroevolution::{evolve_with, FitnessRecord};

use super::config::{ExperimentConfig, Task};
use super::fitness::{CandidateEvaluator, TestOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    TimedOut,
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> &str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::TimedOut => "timeout",
            RunStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub history: Vec<FitnessRecord>,
    pub best_fitness: f64,
    pub best_genome: Vec<MemoryCellChromosome>,
    pub test: Option<TestOutcome>,
    /// Not written to any report file.
    pub wall_clock: Duration,
}

impl RunResult {
    /// Test metric; failed runs count as the worst possible value.
    pub fn metric(&self, task: Task) -> f64 {
        match (&self.test, task) {
            (Some(t), _) if self.status == RunStatus::Completed => t.metric(),
            (_, Task::Csl) => 0.0,
            (_, Task::Sine) => f64::INFINITY,
        }
    }
}

/// Mean, median, min and max of a metric over runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Some(Self {
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            min: v[0],
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
}

impl ExperimentReport {
    pub fn metrics(&self) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| r.metric(self.config.task))
            .collect()
    }

    pub fn aggregate(&self) -> Option<Aggregate> {
        Aggregate::of(&self.metrics())
    }

    /// The best run's metric: the largest range for CSL, the smallest SSE for sine.
    pub fn best_metric(&self) -> Option<f64> {
        let a = self.aggregate()?;
        Some(match self.config.task {
            Task::Csl => a.max,
            Task::Sine => a.min,
        })
    }

    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.status != RunStatus::Completed)
    }
}

/// Executes one seeded run to completion or timeout, then tests its best genome.
pub fn run_single(
    evaluator: &CandidateEvaluator,
    run: usize,
    deadline: Option<Duration>,
) -> RunResult {
    let config = evaluator.config();
    let evolution = config.evolution(run);
    let start = Instant::now();
    let mut timed_out = false;
    let observer = |_: &FitnessRecord| {
        if deadline.is_some_and(|d| start.elapsed() > d) {
            timed_out = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    let outcome = evolve_with(&evolution, |g| evaluator.fitness(g), observer);
    let mut result = RunResult {
        run,
        seed: evolution.rng_seed,
        status: RunStatus::Completed,
        history: Vec::new(),
        best_fitness: f64::INFINITY,
        best_genome: Vec::new(),
        test: None,
        wall_clock: Duration::ZERO,
    };
    match outcome {
        Ok(outcome) => {
            result.history = outcome.history;
            result.best_fitness = outcome.best_fitness;
            if timed_out {
                result.status = RunStatus::TimedOut;
            } else {
                match evaluator.test(&outcome.best_genome) {
                    Ok(t) => result.test = Some(t),
                    Err(e) => result.status = RunStatus::Failed(e.to_string()),
                }
            }
            result.best_genome = outcome.best_genome;
        }
        Err(e) => result.status = RunStatus::Failed(e.to_string()),
    }
    result.wall_clock = start.elapsed();
    result
}

/// Runs `config.runs` independent seeded runs in parallel. Results are in run order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let evaluator = CandidateEvaluator::new(config)?;
    let deadline = (config.timeout_secs > 0).then(|| Duration::from_secs(config.timeout_secs));
    let runs = (0..config.runs)
        .into_par_iter()
        .map(|r| run_single(&evaluator, r, deadline))
        .collect();
    Ok(ExperimentReport {
        config: config.clone(),
        runs,
    })
}
