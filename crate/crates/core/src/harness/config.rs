//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lstm::GateBiases;
use crate::neuroevolution::EvolutionConfig;
use crate::readout::SvmParams;
use crate::tasks::csl::N_SYMBOL_INPUTS;
use crate::tasks::sine::SINE_INPUTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Csl,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutKind {
    Svm,
    Pseudoinverse,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Csl => "csl",
            Task::Sine => "sine",
        })
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csl" => Ok(Task::Csl),
            "sine" => Ok(Task::Sine),
            other => Err(Error::Parse(format!("unknown task {other:?}"))),
        }
    }
}

impl fmt::Display for ReadoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReadoutKind::Svm => "svm",
            ReadoutKind::Pseudoinverse => "pi",
        })
    }
}

impl FromStr for ReadoutKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(ReadoutKind::Svm),
            "pi" | "pseudoinverse" => Ok(ReadoutKind::Pseudoinverse),
            other => Err(Error::Parse(format!("unknown readout {other:?}"))),
        }
    }
}

/// Every knob of an experiment campaign. The output directory is not part of
/// the configuration so that reports written to different places are
/// byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub readout: ReadoutKind,
    /// Largest `n` of the CSL training set (first half trains, second validates).
    pub csl_n: usize,
    /// Cap on the generalization scan.
    pub csl_max_test_n: usize,
    /// Add the mean hinge residual to the CSL sign-error count.
    pub csl_residual: bool,
    pub sine_length: usize,
    pub n_cells: usize,
    pub subpop_size: usize,
    pub trials_per_neuron: usize,
    pub cauchy_alpha: f64,
    pub init_low: f64,
    pub init_high: f64,
    /// 0 disables burst mutation.
    pub stagnation_window: usize,
    pub generations: usize,
    pub forget_bias: f64,
    pub output_bias: f64,
    pub sigma: f64,
    pub capacity: f64,
    pub epsilon: f64,
    pub smo_tol: f64,
    pub smo_max_iter: usize,
    pub runs: usize,
    pub seed: u64,
    pub timeout_secs: u64,
}

impl ExperimentConfig {
    /// Defaults for `a^n b^n c^n` with N = 10.
    pub fn csl() -> Self {
        Self {
            task: Task::Csl,
            readout: ReadoutKind::Svm,
            csl_n: 10,
            csl_max_test_n: 1000,
            csl_residual: true,
            sine_length: 1000,
            n_cells: 5,
            subpop_size: 40,
            trials_per_neuron: 2,
            cauchy_alpha: 0.1,
            init_low: -5.0,
            init_high: 5.0,
            stagnation_window: 10,
            generations: 50,
            forget_bias: 1.5,
            output_bias: -1.5,
            sigma: 2.0,
            capacity: 100.0,
            epsilon: 0.01,
            smo_tol: 1e-3,
            smo_max_iter: 10_000_000,
            runs: 20,
            seed: 42,
            timeout_secs: 1800,
        }
    }

    /// Defaults for the two-sine generation task.
    pub fn sine() -> Self {
        Self {
            task: Task::Sine,
            n_cells: 10,
            subpop_size: 20,
            trials_per_neuron: 3,
            init_low: -1.0,
            init_high: 1.0,
            forget_bias: 0.0,
            output_bias: 0.0,
            capacity: 10.0,
            ..Self::csl()
        }
    }

    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Csl => Self::csl(),
            Task::Sine => Self::sine(),
        }
    }

    /// Network input channels, including the feedback channel for sine.
    pub fn n_inputs(&self) -> usize {
        match self.task {
            Task::Csl => N_SYMBOL_INPUTS,
            Task::Sine => SINE_INPUTS,
        }
    }

    pub fn biases(&self) -> GateBiases {
        GateBiases {
            forget: self.forget_bias,
            output: self.output_bias,
        }
    }

    pub fn svm_params(&self) -> Result<SvmParams> {
        let mut params = SvmParams::new(self.sigma, self.capacity, self.epsilon)?;
        params.smo.tol = self.smo_tol;
        params.smo.max_iter = self.smo_max_iter;
        Ok(params)
    }

    /// Evolution settings for run `run` (seeded with `seed + run`).
    pub fn evolution(&self, run: usize) -> EvolutionConfig {
        EvolutionConfig {
            n_cells: self.n_cells,
            n_inputs: self.n_inputs(),
            subpop_size: self.subpop_size,
            trials_per_neuron: self.trials_per_neuron,
            cauchy_alpha: self.cauchy_alpha,
            weight_init_range: (self.init_low, self.init_high),
            stagnation_window: (self.stagnation_window > 0).then_some(self.stagnation_window),
            max_generations: self.generations,
            rng_seed: self.seed.wrapping_add(run as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.evolution(0).validate()?;
        self.svm_params()?;
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if self.smo_tol.is_nan() || self.smo_tol <= 0.0 {
            return Err(Error::InvalidConfig("smo_tol must be positive".into()));
        }
        match self.task {
            Task::Csl if self.csl_n < 2 => {
                Err(Error::InvalidConfig("csl_n must be at least 2".into()))
            }
            Task::Csl if self.csl_max_test_n == 0 => Err(Error::InvalidConfig(
                "csl_max_test_n must be at least 1".into(),
            )),
            Task::Sine if self.sine_length < 1000 => Err(Error::InvalidConfig(
                "sine_length must cover the test segment (>= 1000)".into(),
            )),
            _ => Ok(()),
        }
    }

    /// `(key, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("task", self.task.to_string()),
            ("readout", self.readout.to_string()),
            ("csl_n", self.csl_n.to_string()),
            ("csl_max_test_n", self.csl_max_test_n.to_string()),
            ("csl_residual", self.csl_residual.to_string()),
            ("sine_length", self.sine_length.to_string()),
            ("n_cells", self.n_cells.to_string()),
            ("subpop_size", self.subpop_size.to_string()),
            ("trials_per_neuron", self.trials_per_neuron.to_string()),
            ("cauchy_alpha", self.cauchy_alpha.to_string()),
            ("init_low", self.init_low.to_string()),
            ("init_high", self.init_high.to_string()),
            ("stagnation_window", self.stagnation_window.to_string()),
            ("generations", self.generations.to_string()),
            ("forget_bias", self.forget_bias.to_string()),
            ("output_bias", self.output_bias.to_string()),
            ("sigma", self.sigma.to_string()),
            ("capacity", self.capacity.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("smo_tol", self.smo_tol.to_string()),
            ("smo_max_iter", self.smo_max_iter.to_string()),
            ("runs", self.runs.to_string()),
            ("seed", self.seed.to_string()),
            ("timeout_secs", self.timeout_secs.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            value
                .parse()
                .map_err(|e| Error::Parse(format!("{key} = {value:?}: {e}")))
        }
        match key {
            "task" => self.task = value.parse()?,
            "readout" => self.readout = value.parse()?,
            "csl_n" => self.csl_n = num(key, value)?,
            "csl_max_test_n" => self.csl_max_test_n = num(key, value)?,
            "csl_residual" => self.csl_residual = num(key, value)?,
            "sine_length" => self.sine_length = num(key, value)?,
            "n_cells" => self.n_cells = num(key, value)?,
            "subpop_size" => self.subpop_size = num(key, value)?,
            "trials_per_neuron" => self.trials_per_neuron = num(key, value)?,
            "cauchy_alpha" => self.cauchy_alpha = num(key, value)?,
            "init_low" => self.init_low = num(key, value)?,
            "init_high" => self.init_high = num(key, value)?,
            "stagnation_window" => self.stagnation_window = num(key, value)?,
            "generations" => self.generations = num(key, value)?,
            "forget_bias" => self.forget_bias = num(key, value)?,
            "output_bias" => self.output_bias = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "capacity" => self.capacity = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "smo_tol" => self.smo_tol = num(key, value)?,
            "smo_max_iter" => self.smo_max_iter = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "timeout_secs" => self.timeout_secs = num(key, value)?,
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Parses a config text. Defaults come from the `task` key (csl if absent).
    pub fn from_text(text: &str) -> Result<Self> {
        let task = text
            .lines()
            .filter_map(|l| l.split('#').next()?.split_once('='))
            .find(|(k, _)| k.trim() == "task")
            .map(|(_, v)| v.trim().parse())
            .transpose()?
            .unwrap_or(Task::Csl);
        let mut config = Self::for_task(task);
        config.apply_text(text)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_evaluation_budgets() {
        let c = ExperimentConfig::csl();
        assert_eq!((c.n_cells, c.init_low, c.init_high), (5, -5.0, 5.0));
        assert_eq!((c.forget_bias, c.output_bias), (1.5, -1.5));
        assert_eq!(
            (c.sigma, c.capacity, c.cauchy_alpha, c.generations),
            (2.0, 100.0, 0.1, 50)
        );
        let s = ExperimentConfig::sine();
        assert_eq!((s.n_cells, s.init_low, s.init_high), (10, -1.0, 1.0));
        assert_eq!((s.sigma, s.capacity, s.generations), (2.0, 10.0, 50));
        assert_eq!(
            s.evolution(0).evaluations_per_generation() * s.generations,
            3000
        );
        assert_eq!(c.evolution(0).evaluations_per_generation(), 80);
        c.validate().unwrap();
        s.validate().unwrap();
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::sine();
        c.readout = ReadoutKind::Pseudoinverse;
        c.epsilon = 0.0125;
        c.seed = 7;
        c.init_low = -0.3;
        c.csl_residual = false;
        let back = ExperimentConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parsing_errors_and_comments() {
        let c = ExperimentConfig::from_text("# comment\ntask = sine\nruns = 3 # inline\n").unwrap();
        assert_eq!((c.task, c.runs, c.n_cells), (Task::Sine, 3, 10));
        assert!(ExperimentConfig::from_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_text("runs = many").is_err());
        assert!(ExperimentConfig::from_text("runs 3").is_err());
        let bad = ExperimentConfig {
            subpop_size: 10,
            ..ExperimentConfig::csl()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn run_seeds_are_offset() {
        let c = ExperimentConfig {
            seed: 7,
            ..ExperimentConfig::csl()
        };
        assert_eq!(c.evolution(0).rng_seed, 7);
        assert_eq!(c.evolution(3).rng_seed, 10);
        assert_eq!(c.evolution(0).stagnation_window, Some(10));
        let never = ExperimentConfig {
            stagnation_window: 0,
            ..c
        };
        assert_eq!(never.evolution(0).stagnation_window, None);
    }
}
