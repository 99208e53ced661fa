use std::fs;

use evoke::harness::{
    emit_report, run_experiment, CandidateEvaluator, ExperimentConfig, ReadoutKind, TestOutcome,
};
use evoke::lstm::{GateBiases, LstmNetwork, MemoryCellChromosome};
use evoke::readout::fit_pseudoinverse;
use evoke::tasks::csl::{generate_csl_set, PREDICTED};
use evoke::tasks::sine;

/// Four cells wired as a delay line on the fed-back value, with the forget
/// gates shut and the output gates open, in the near-linear regime.
fn delay_line() -> (Vec<MemoryCellChromosome>, GateBiases) {
    let cells = 4;
    let genome = (0..cells)
        .map(|k| {
            let mut w = vec![0.0; 4 * (1 + cells)];
            // cell-input block: [feedback, phi_0 .. phi_3]
            if k == 0 {
                w[0] = 0.002;
            } else {
                w[k] = 2.0;
            }
            MemoryCellChromosome::new(w).unwrap()
        })
        .collect();
    let biases = GateBiases {
        forget: -40.0,
        output: 40.0,
    };
    (genome, biases)
}

#[test]
fn hand_built_delay_line_generates_the_sine() {
    let (genome, biases) = delay_line();
    let mut net = LstmNetwork::decode(&genome, 1, biases).unwrap();
    let series = sine::generate_sine_series(1000);
    let (readout, scores) = sine::sine_scores(&mut net, &series, fit_pseudoinverse).unwrap();
    assert!(scores.total() < 1e-6, "clamped error {scores:?}");
    let free = sine::sine_test(&mut net, &readout, &series).unwrap();
    let forced = sine::sine_test_teacher_forced(&mut net, &readout, &series).unwrap();
    assert_eq!(free.predictions.len(), 300);
    assert!(free.sse() < 1e-3, "free-running SSE {}", free.sse());
    assert!(forced.sse() <= free.sse());
}

#[test]
fn zero_genome_csl_fitness_is_best_constant_error() {
    let dataset = generate_csl_set(10).unwrap();
    // majority sign over the training half, ties resolved to -1
    let mut expected = 0;
    for sym in PREDICTED {
        let train: Vec<f64> = dataset
            .training()
            .iter()
            .flat_map(|s| s.targets(sym))
            .collect();
        let positives = train.iter().filter(|&&d| d > 0.0).count();
        let constant = if 2 * positives > train.len() {
            1.0
        } else {
            -1.0
        };
        expected += dataset
            .strings
            .iter()
            .flat_map(|s| s.targets(sym))
            .filter(|&d| d != constant)
            .count();
    }
    for readout in [ReadoutKind::Svm, ReadoutKind::Pseudoinverse] {
        let config = ExperimentConfig {
            readout,
            csl_residual: false,
            ..ExperimentConfig::csl()
        };
        let evaluator = CandidateEvaluator::new(&config).unwrap();
        let genome: Vec<MemoryCellChromosome> = (0..config.n_cells)
            .map(|_| MemoryCellChromosome::new(vec![0.0; 4 * (4 + config.n_cells)]).unwrap())
            .collect();
        assert_eq!(evaluator.fitness(&genome), expected as f64, "{readout}");
    }
}

#[test]
fn residual_term_stays_below_one_error_for_a_fitted_genome() {
    let config = ExperimentConfig::csl();
    let evaluator = CandidateEvaluator::new(&config).unwrap();
    let plain = CandidateEvaluator::new(&ExperimentConfig {
        csl_residual: false,
        ..config.clone()
    })
    .unwrap();
    let genome: Vec<MemoryCellChromosome> = (0..5)
        .map(|c| {
            let w = (0..36).map(|k| (((k * 7 + c * 13) % 11) as f64 - 5.0) / 2.0);
            MemoryCellChromosome::new(w.collect()).unwrap()
        })
        .collect();
    let with = evaluator.fitness(&genome);
    let without = plain.fitness(&genome);
    assert!(with >= without);
    assert!(with.is_finite());
}

#[test]
fn report_files_match_their_contracts() {
    let config = ExperimentConfig {
        readout: ReadoutKind::Pseudoinverse,
        n_cells: 2,
        subpop_size: 4,
        generations: 3,
        runs: 2,
        seed: 11,
        ..ExperimentConfig::sine()
    };
    let report = run_experiment(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&report, dir.path()).unwrap();
    assert!(files.iter().all(|f| f.exists()));

    let fitness = fs::read_to_string(dir.path().join("fitness.csv")).unwrap();
    assert_eq!(
        fitness.lines().count(),
        1 + config.runs * config.generations
    );
    assert!(fitness.starts_with("run,generation,best_fitness,evaluations"));

    let echo = fs::read_to_string(dir.path().join("config.txt")).unwrap();
    assert_eq!(ExperimentConfig::from_text(&echo).unwrap(), config);

    for run in 0..config.runs {
        let csv = fs::read_to_string(dir.path().join(format!("predictions_run{run}.csv"))).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,target,prediction");
        assert_eq!(lines.len(), 301);
        assert!(lines[1].starts_with("701,"));
        assert!(lines[300].starts_with("1000,"));
    }

    let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + config.runs);
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let a = report.aggregate().unwrap();
    assert!(summary.contains(&format!("median = {}", a.median)));
}

#[test]
fn single_run_aggregate_equals_the_run() {
    let config = ExperimentConfig {
        readout: ReadoutKind::Pseudoinverse,
        n_cells: 3,
        subpop_size: 8,
        generations: 5,
        runs: 1,
        ..ExperimentConfig::csl()
    };
    let report = run_experiment(&config).unwrap();
    let a = report.aggregate().unwrap();
    let m = report.runs[0].metric(config.task);
    assert_eq!((a.mean, a.median, a.min, a.max), (m, m, m, m));
    match &report.runs[0].test {
        Some(TestOutcome::Csl { readouts, .. }) => assert_eq!(readouts.len(), 4),
        other => panic!("unexpected test outcome {other:?}"),
    }
}
