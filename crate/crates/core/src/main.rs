use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use evoke::harness::{emit_report, run_experiment, ExperimentConfig, ExperimentReport, Task};
use evoke::selftest;
use evoke::tasks::{csl, sine};

#[derive(Parser)]
#[command(
    name = "evoke",
    version,
    about = "Evolved LSTM features with analytic readouts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve networks for the a^n b^n c^n prediction task.
    RunCsl(RunArgs),
    /// Evolve networks for the superimposed-sine generation task.
    RunSine(RunArgs),
    /// Check the solvers against the reference implementations.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write a task's data set as text.
    DumpData {
        #[arg(value_parser = ["csl", "sine"])]
        task: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    length: Option<usize>,
    /// svm or pi
    #[arg(long)]
    readout: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    subpop_size: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    capacity: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Generations without improvement before burst mutation; 0 disables it.
    #[arg(long)]
    stagnation: Option<usize>,
    /// Per-run wall-clock limit; 0 disables it.
    #[arg(long)]
    timeout_secs: Option<u64>,
    #[arg(long)]
    max_test_n: Option<usize>,
    /// Any configuration key, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn config(&self, task: Task) -> anyhow::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let loaded = ExperimentConfig::load(path)?;
                if loaded.task != task {
                    bail!("{} configures task {}", path.display(), loaded.task);
                }
                loaded
            }
            None => ExperimentConfig::for_task(task),
        };
        let flags: [(&str, Option<String>); 16] = [
            ("csl_n", self.n.map(|v| v.to_string())),
            ("sine_length", self.length.map(|v| v.to_string())),
            ("readout", self.readout.clone()),
            ("runs", self.runs.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("generations", self.generations.map(|v| v.to_string())),
            ("n_cells", self.cells.map(|v| v.to_string())),
            ("subpop_size", self.subpop_size.map(|v| v.to_string())),
            ("trials_per_neuron", self.trials.map(|v| v.to_string())),
            ("cauchy_alpha", self.alpha.map(|v| v.to_string())),
            ("sigma", self.sigma.map(|v| v.to_string())),
            ("capacity", self.capacity.map(|v| v.to_string())),
            ("epsilon", self.epsilon.map(|v| v.to_string())),
            ("stagnation_window", self.stagnation.map(|v| v.to_string())),
            ("timeout_secs", self.timeout_secs.map(|v| v.to_string())),
            ("csl_max_test_n", self.max_test_n.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                config.set(key, &value)?;
            }
        }
        for item in &self.overrides {
            let (key, value) = item
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got {item:?}"))?;
            if key.trim() == "task" {
                bail!("the task is chosen by the subcommand");
            }
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn print_report(report: &ExperimentReport) {
    let task = report.config.task;
    for run in &report.runs {
        eprintln!(
            "run {:>3} seed {:>6} {:<9} generations {:>4} fitness {:<12} metric {} ({:.1}s)",
            run.run,
            run.seed,
            run.status.label(),
            run.history.len(),
            run.best_fitness,
            run.metric(task),
            run.wall_clock.as_secs_f64()
        );
    }
    if let Some(a) = report.aggregate() {
        println!(
            "{} {}: mean {} median {} min {} max {}",
            task, report.config.readout, a.mean, a.median, a.min, a.max
        );
    }
}

fn run(task: Task, args: &RunArgs) -> anyhow::Result<bool> {
    let config = args.config(task)?;
    let report = run_experiment(&config)?;
    print_report(&report);
    if let Some(dir) = &args.out {
        let files = emit_report(&report, dir)?;
        eprintln!("wrote {} files to {}", files.len(), dir.display());
    }
    Ok(!report.any_failed())
}

fn dump(task: &str, n: usize, length: usize, out: Option<PathBuf>) -> anyhow::Result<bool> {
    let text = if task == "csl" {
        csl::generate_csl_set(n)?.to_text()
    } else {
        sine::generate_sine_series(length).to_text()
    };
    match out {
        Some(path) => {
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::RunCsl(args) => run(Task::Csl, &args),
        Command::RunSine(args) => run(Task::Sine, &args),
        Command::Selftest { seed } => {
            let checks = selftest::run_all(seed);
            for c in &checks {
                println!("{}", c.line());
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::DumpData {
            task,
            n,
            length,
            out,
        } => dump(&task, n, length, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
