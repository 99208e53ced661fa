//! Plain-text report files. Contents depend only on the configuration and
//! seeds, so repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tasks::csl::PREDICTED;

use super::config::Task;
use super::experiment::ExperimentReport;
use super::fitness::TestOutcome;

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn fitness_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("run,generation,best_fitness,evaluations,burst\n");
    for run in &report.runs {
        for rec in &run.history {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                run.run, rec.generation, rec.best_fitness, rec.evaluations_so_far, rec.burst as u8
            );
        }
    }
    out
}

pub fn runs_csv(report: &ExperimentReport) -> String {
    let metric = match report.config.task {
        Task::Csl => "generalization",
        Task::Sine => "test_sse",
    };
    let mut out = format!("run,seed,status,generations,best_fitness,{metric}\n");
    for run in &report.runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            run.run,
            run.seed,
            run.status.label(),
            run.history.len(),
            run.best_fitness,
            run.metric(report.config.task)
        );
    }
    out
}

pub fn summary_text(report: &ExperimentReport) -> String {
    let mut out = format!(
        "task = {}\nreadout = {}\nruns = {}\n",
        report.config.task,
        report.config.readout,
        report.runs.len()
    );
    let completed = report
        .runs
        .iter()
        .filter(|r| r.status.label() == "completed")
        .count();
    let _ = writeln!(out, "completed = {completed}");
    if let Some(a) = report.aggregate() {
        let _ = writeln!(
            out,
            "mean = {}\nmedian = {}\nmin = {}\nmax = {}",
            a.mean, a.median, a.min, a.max
        );
    }
    out
}

fn genome_text(report: &ExperimentReport, run: usize) -> String {
    let mut out = String::new();
    for chromosome in &report.runs[run].best_genome {
        let w: Vec<String> = chromosome.weights().iter().map(f64::to_string).collect();
        out.push_str(&w.join(" "));
        out.push('\n');
    }
    out
}

/// Writes every report file into `dir` (created if missing) and returns their paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![
        write(dir, "config.txt", &report.config.to_text())?,
        write(dir, "fitness.csv", &fitness_csv(report))?,
        write(dir, "runs.csv", &runs_csv(report))?,
        write(dir, "summary.txt", &summary_text(report))?,
    ];
    for run in &report.runs {
        let r = run.run;
        if !run.best_genome.is_empty() {
            written.push(write(
                dir,
                &format!("genome_run{r}.txt"),
                &genome_text(report, r),
            )?);
        }
        match &run.test {
            Some(TestOutcome::Sine { run: test, readout }) => {
                written.push(write(
                    dir,
                    &format!("predictions_run{r}.csv"),
                    &test.to_csv(),
                )?);
                written.push(write(
                    dir,
                    &format!("model_run{r}.txt"),
                    &readout.to_text(),
                )?);
            }
            Some(TestOutcome::Csl { readouts, .. }) => {
                for (sym, readout) in PREDICTED.iter().zip(readouts) {
                    let name = format!("model_run{r}_{}.txt", sym.as_char());
                    written.push(write(dir, &name, &readout.to_text())?);
                }
            }
            None => {}
        }
    }
    Ok(written)
}
