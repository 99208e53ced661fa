//! Two-phase candidate evaluation: fit the readout on training activations,
//! then score the combined system on training plus validation data.

use crate::error::Result;
use crate::lstm::{LstmNetwork, MemoryCellChromosome};
use crate::neuroevolution::FAILED_FITNESS;
use crate::readout::{
    fit_pseudoinverse, fit_svc, fit_svr, ActivationTable, LinearReadout, Readout, SvmModel,
    SvmParams,
};
use crate::tasks::csl::{
    self, collect_activations, count_sign_errors, fit_classifiers, hinge_residual,
    tables_from_activations, CslDataset,
};
use crate::tasks::sine::{self, SineSeries, SineTestRun};

use super::config::{ExperimentConfig, ReadoutKind, Task};

/// Per-string, per-step cell outputs.
type Activations = Vec<Vec<Vec<f64>>>;

/// A fitted output layer of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedReadout {
    Svm(SvmModel),
    Linear(LinearReadout),
}

impl Readout for FittedReadout {
    fn predict(&self, phi: &[f64]) -> Result<f64> {
        match self {
            FittedReadout::Svm(m) => m.predict(phi),
            FittedReadout::Linear(l) => l.predict(phi),
        }
    }
}

impl FittedReadout {
    /// Text form: the SVM flat format, or `# linear`, the bias, then weights.
    pub fn to_text(&self) -> String {
        match self {
            FittedReadout::Svm(m) => m.to_text(),
            FittedReadout::Linear(l) => {
                let weights: Vec<String> = l.weights.iter().map(f64::to_string).collect();
                format!("# linear\n{}\n{}\n", l.bias, weights.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone)]
enum TaskData {
    Csl(CslDataset),
    Sine(SineSeries),
}

/// Result of testing a genome after evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum TestOutcome {
    Csl {
        generalization: usize,
        readouts: Vec<FittedReadout>,
    },
    Sine {
        run: SineTestRun,
        readout: FittedReadout,
    },
}

impl TestOutcome {
    /// Generalization range for CSL, test SSE for sine.
    pub fn metric(&self) -> f64 {
        match self {
            TestOutcome::Csl { generalization, .. } => *generalization as f64,
            TestOutcome::Sine { run, .. } => run.sse(),
        }
    }
}

/// Maps genomes to fitness for one experiment configuration.
#[derive(Debug, Clone)]
pub struct CandidateEvaluator {
    config: ExperimentConfig,
    svm: SvmParams,
    data: TaskData,
}

impl CandidateEvaluator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let data = match config.task {
            Task::Csl => TaskData::Csl(csl::generate_csl_set(config.csl_n)?),
            Task::Sine => TaskData::Sine(sine::generate_sine_series(config.sine_length)),
        };
        Ok(Self {
            config: config.clone(),
            svm: config.svm_params()?,
            data,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn decode(&self, genome: &[MemoryCellChromosome]) -> Result<LstmNetwork> {
        LstmNetwork::decode(genome, self.config.n_inputs(), self.config.biases())
    }

    fn fit_classifier(&self, table: &ActivationTable) -> Result<FittedReadout> {
        Ok(match self.config.readout {
            ReadoutKind::Svm => FittedReadout::Svm(fit_svc(table, &self.svm)?),
            ReadoutKind::Pseudoinverse => FittedReadout::Linear(fit_pseudoinverse(table)?),
        })
    }

    fn fit_regressor(&self, table: &ActivationTable) -> Result<FittedReadout> {
        Ok(match self.config.readout {
            ReadoutKind::Svm => FittedReadout::Svm(fit_svr(table, &self.svm)?),
            ReadoutKind::Pseudoinverse => FittedReadout::Linear(fit_pseudoinverse(table)?),
        })
    }

    fn csl_readouts(
        &self,
        net: &mut LstmNetwork,
        dataset: &CslDataset,
    ) -> Result<(Activations, [FittedReadout; 4])> {
        let activations = collect_activations(net, &dataset.strings)?;
        let n_train = dataset.training().len();
        let tables =
            tables_from_activations(&activations[..n_train], dataset.training(), net.n_cells())?;
        let readouts = fit_classifiers(&tables, |t| self.fit_classifier(t))?;
        Ok((activations, readouts))
    }

    /// Fitness (lower is better), or an error if the candidate cannot be scored.
    pub fn try_fitness(&self, genome: &[MemoryCellChromosome]) -> Result<f64> {
        let mut net = self.decode(genome)?;
        match &self.data {
            TaskData::Csl(dataset) => {
                let (activations, readouts) = self.csl_readouts(&mut net, dataset)?;
                let errors = count_sign_errors(&readouts, &activations, &dataset.strings)? as f64;
                if self.config.csl_residual {
                    Ok(errors + hinge_residual(&readouts, &activations, &dataset.strings)?)
                } else {
                    Ok(errors)
                }
            }
            TaskData::Sine(series) => {
                let (_, scores) = sine::sine_scores(&mut net, series, |t| self.fit_regressor(t))?;
                Ok(scores.total())
            }
        }
    }

    /// Total fitness function: any failure or non-finite value is the worst fitness.
    pub fn fitness(&self, genome: &[MemoryCellChromosome]) -> f64 {
        match self.try_fitness(genome) {
            Ok(f) if f.is_finite() => f,
            _ => FAILED_FITNESS,
        }
    }

    /// Activation rows the readout is fitted on, for inspection.
    pub fn training_rows(&self, genome: &[MemoryCellChromosome]) -> Result<Vec<Vec<f64>>> {
        let mut net = self.decode(genome)?;
        match &self.data {
            TaskData::Csl(dataset) => Ok(collect_activations(&mut net, dataset.training())?
                .into_iter()
                .flatten()
                .collect()),
            TaskData::Sine(series) => {
                let rows = sine::clamped_activations(&mut net, series, *sine::VALIDATION.end())?;
                Ok(rows[*sine::TRAIN.start() - 1..*sine::TRAIN.end()].to_vec())
            }
        }
    }

    /// Fits the readout(s) exactly as during evolution and runs the task's test.
    pub fn test(&self, genome: &[MemoryCellChromosome]) -> Result<TestOutcome> {
        let mut net = self.decode(genome)?;
        match &self.data {
            TaskData::Csl(dataset) => {
                let (_, readouts) = self.csl_readouts(&mut net, dataset)?;
                let generalization =
                    csl::csl_generalization(&mut net, &readouts, self.config.csl_max_test_n)?;
                Ok(TestOutcome::Csl {
                    generalization,
                    readouts: readouts.to_vec(),
                })
            }
            TaskData::Sine(series) => {
                let (readout, _) = sine::sine_scores(&mut net, series, |t| self.fit_regressor(t))?;
                let run = sine::sine_test(&mut net, &readout, series)?;
                Ok(TestOutcome::Sine { run, readout })
            }
        }
    }
}

/// The fitness function for `config` as a closure.
pub fn make_fitness_fn(
    config: &ExperimentConfig,
) -> Result<impl Fn(&[MemoryCellChromosome]) -> f64 + Sync> {
    let evaluator = CandidateEvaluator::new(config)?;
    Ok(move |genome: &[MemoryCellChromosome]| evaluator.fitness(genome))
}
