#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evoke::harness::{CandidateEvaluator, ExperimentConfig, ReadoutKind};
use evoke::lstm::{GateBiases, InputMode, LstmNetwork, MemoryCellChromosome};
use evoke::neuroevolution::{
    burst_mutate, evaluate_generation, evolve, init_subpopulations, select_and_mutate,
    EvolutionConfig,
};
use evoke::oracle;
use evoke::readout::{fit_pseudoinverse, fit_svc, fit_svr, ActivationTable, Readout, SvmParams};
use evoke::tasks::csl::{self, Symbol, SymbolSet, SymbolString, PREDICTED};
use evoke::tasks::sine;

pub type Check = Result<(), String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn random_genome(
    rng: &mut ChaCha8Rng,
    cells: usize,
    inputs: usize,
    range: f64,
) -> Vec<MemoryCellChromosome> {
    (0..cells)
        .map(|_| {
            let w = (0..MemoryCellChromosome::expected_len(inputs, cells))
                .map(|_| rng.random_range(-range..=range))
                .collect();
            MemoryCellChromosome::new(w).unwrap()
        })
        .collect()
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, width: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..width)
                .map(|_| rng.random_range(-scale..scale))
                .collect()
        })
        .collect()
}

/// Best-so-far fitness never increases, on a real CSL run with bursts.
pub fn elitism_monotonicity() -> Check {
    let mut config = ExperimentConfig::csl();
    config.readout = ReadoutKind::Pseudoinverse;
    config.csl_n = 6;
    config.n_cells = 3;
    config.subpop_size = 8;
    config.generations = 30;
    config.stagnation_window = 3;
    let evaluator = CandidateEvaluator::new(&config).map_err(|e| e.to_string())?;
    for run in 0..3 {
        let outcome =
            evolve(&config.evolution(run), |g| evaluator.fitness(g)).map_err(|e| e.to_string())?;
        for pair in outcome.history.windows(2) {
            ensure(pair[1].best_fitness <= pair[0].best_fitness, || {
                format!(
                    "run {run}: best fitness rose from {} to {} at generation {}",
                    pair[0].best_fitness, pair[1].best_fitness, pair[1].generation
                )
            })?;
        }
        let last = outcome.history.last().ok_or("empty history")?;
        ensure(last.best_fitness == outcome.best_fitness, || {
            "final best differs from the last record".into()
        })?;
    }
    Ok(())
}

/// Subpopulation sizes survive evaluation, selection and burst mutation.
pub fn subpopulation_sizes_constant() -> Check {
    let config = EvolutionConfig {
        n_cells: 3,
        n_inputs: 2,
        subpop_size: 12,
        ..EvolutionConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut subpops = init_subpopulations(&config, &mut rng).map_err(|e| e.to_string())?;
    let fitness = |g: &[MemoryCellChromosome]| g.iter().map(|c| c.weights()[0].abs()).sum();
    for _ in 0..5 {
        let eval =
            evaluate_generation(&mut subpops, &fitness, 3, &mut rng).map_err(|e| e.to_string())?;
        for sp in &mut subpops {
            select_and_mutate(sp, 0.1, &mut rng);
        }
        burst_mutate(&mut subpops, &eval.best_genome, 0.1, &mut rng).map_err(|e| e.to_string())?;
        ensure(subpops.iter().all(|sp| sp.len() == 12), || {
            "subpopulation size changed".into()
        })?;
    }
    Ok(())
}

/// Identical config and seed give identical histories and genomes.
pub fn evolution_determinism() -> Check {
    let mut config = ExperimentConfig::sine();
    config.readout = ReadoutKind::Pseudoinverse;
    config.n_cells = 3;
    config.subpop_size = 8;
    config.generations = 6;
    let evaluator = CandidateEvaluator::new(&config).map_err(|e| e.to_string())?;
    let a = evolve(&config.evolution(0), |g| evaluator.fitness(g)).map_err(|e| e.to_string())?;
    let b = evolve(&config.evolution(0), |g| evaluator.fitness(g)).map_err(|e| e.to_string())?;
    ensure(a == b, || "two runs with one seed differ".into())?;
    let c = evolve(&config.evolution(1), |g| evaluator.fitness(g)).map_err(|e| e.to_string())?;
    ensure(a.history != c.history, || {
        "different seeds gave identical runs".into()
    })
}

/// With the forget gate saturated open and the input gate shut, the cell
/// state does not move regardless of the input.
pub fn cec_constancy() -> Check {
    // one input, one cell: blocks (cell input, input gate, forget, output) x (u, phi)
    let weights = vec![1.0, 0.0, 200.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let chromosome = MemoryCellChromosome::new(weights).map_err(|e| e.to_string())?;
    let biases = GateBiases {
        forget: 60.0,
        output: 0.0,
    };
    let mut net = LstmNetwork::decode(&[chromosome], 1, biases).map_err(|e| e.to_string())?;
    net.step(&[1.0]).map_err(|e| e.to_string())?;
    let stored = net.cell_states()[0];
    ensure((stored - 1.0f64.tanh()).abs() < 1e-12, || {
        format!("write step stored {stored}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in 0..2000 {
        // negative inputs keep the input gate closed
        let u = -rng.random_range(0.5..3.0);
        net.step(&[u]).map_err(|e| e.to_string())?;
        let s = net.cell_states()[0];
        ensure((s - stored).abs() < 1e-12, || {
            format!("state drifted to {s} at step {t}")
        })?;
    }
    Ok(())
}

/// Gaussian Gram matrices of random row sets are PSD.
pub fn kernel_psd() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..50 {
        let width = rng.random_range(1..=6);
        let scale = [0.01, 1.0, 10.0][trial % 3];
        let rows = random_rows(&mut rng, 10, width, scale);
        let sigma = rng.random_range(0.1..5.0);
        let mut k = DMatrix::zeros(10, 10);
        for i in 0..10 {
            for j in 0..10 {
                k[(i, j)] = evoke::readout::gaussian_kernel(&rows[i], &rows[j], sigma)
                    .map_err(|e| e.to_string())?;
            }
        }
        ensure(k == k.transpose(), || "gram matrix not symmetric".into())?;
        let min = k.symmetric_eigenvalues().min();
        ensure(min >= -1e-8, || {
            format!("min eigenvalue {min} on trial {trial}")
        })?;
    }
    Ok(())
}

/// Fitted SVM coefficients respect the box `|w| <= C`.
pub fn box_constraints() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for trial in 0..20 {
        let n = rng.random_range(5..40);
        let width = rng.random_range(1..5);
        let rows = random_rows(&mut rng, n, width, 1.0);
        let c = [0.1, 1.0, 10.0, 100.0][trial % 4];
        let params = SvmParams::new(1.0, c, 0.05).map_err(|e| e.to_string())?;
        let mut labels: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        labels[0] = 1.0;
        labels[1] = -1.0;
        let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let svc = ActivationTable::from_rows(&rows, &labels)
            .and_then(|t| fit_svc(&t, &params))
            .map_err(|e| e.to_string())?;
        let svr = ActivationTable::from_rows(&rows, &targets)
            .and_then(|t| fit_svr(&t, &params))
            .map_err(|e| e.to_string())?;
        for model in [&svc, &svr] {
            let worst = model
                .coefficients()
                .iter()
                .fold(0.0f64, |m, w| m.max(w.abs()));
            ensure(worst <= c + 1e-9, || {
                format!("|w| = {worst} exceeds C = {c} on trial {trial}")
            })?;
        }
    }
    Ok(())
}

/// Exact-bits lookup from activation rows to +-1 targets: the readout of a
/// system that has memorized the grammar oracle on the rows it has seen.
struct LookupReadout(HashMap<Vec<u64>, f64>);

impl Readout for LookupReadout {
    fn predict(&self, phi: &[f64]) -> evoke::Result<f64> {
        let key: Vec<u64> = phi.iter().map(|v| v.to_bits()).collect();
        Ok(*self.0.get(&key).unwrap_or(&-1.0))
    }
}

fn oracle_set(prefix: &[Symbol], max_n: usize) -> SymbolSet {
    let text: String = prefix[1..].iter().map(|s| s.as_char()).collect();
    let chars = oracle::legal_next_by_enumeration(&text, max_n);
    SymbolSet::of(
        &chars
            .iter()
            .map(|&c| Symbol::from_char(c).unwrap())
            .collect::<Vec<_>>(),
    )
}

/// Oracle models accept every legal string and reject 100 one-symbol
/// corruptions, both through the network path and the pure acceptance rule.
pub fn grammar_oracle_fuzz() -> Check {
    let max_n = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let genome = random_genome(&mut rng, 4, 4, 1.0);
    let mut net =
        LstmNetwork::decode(&genome, 4, GateBiases::default()).map_err(|e| e.to_string())?;
    let mut tables: [HashMap<Vec<u64>, f64>; 4] = Default::default();
    for n in 1..=max_n {
        let s = SymbolString::new(n);
        net.reset();
        let rows = net
            .run_sequence(&s.inputs(), None, InputMode::ExternalOnly)
            .map_err(|e| e.to_string())?;
        for (t, row) in rows.iter().enumerate() {
            let legal = oracle_set(&s.symbols[..=t], max_n + 1);
            let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
            for (table, &sym) in tables.iter_mut().zip(&PREDICTED) {
                table.insert(key.clone(), if legal.contains(sym) { 1.0 } else { -1.0 });
            }
        }
    }
    let models = tables.map(LookupReadout);

    for n in 1..=max_n {
        let s = SymbolString::new(n);
        ensure(
            csl::classify_string(&mut net, &models, &s.symbols).map_err(|e| e.to_string())?,
            || format!("legal string n={n} rejected"),
        )?;
    }
    let letters = [Symbol::A, Symbol::B, Symbol::C];
    for k in 0..100 {
        let n = rng.random_range(1..=max_n);
        let mut symbols = SymbolString::new(n).symbols;
        let pos = rng.random_range(1..symbols.len());
        let original = symbols[pos];
        let options: Vec<Symbol> = letters.iter().copied().filter(|&s| s != original).collect();
        symbols[pos] = *options.choose(&mut rng).unwrap();
        let text: String = symbols.iter().map(|s| s.as_char()).collect();
        ensure(
            !csl::classify_string(&mut net, &models, &symbols).map_err(|e| e.to_string())?,
            || format!("corruption {k} ({text}) accepted by the network path"),
        )?;
        let oracle_predictions: Vec<SymbolSet> = (1..=symbols.len())
            .map(|t| oracle_set(&symbols[..t], max_n + 1))
            .collect();
        ensure(!csl::accepts(&symbols, &oracle_predictions), || {
            format!("corruption {k} ({text}) accepted by the rule")
        })?;
    }
    Ok(())
}

/// The pseudoinverse training MSE is no worse than 100 random linear maps.
pub fn pseudoinverse_beats_probes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let width = rng.random_range(1..8);
        let rows = random_rows(&mut rng, 40, width, 1.0);
        let targets: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fit = ActivationTable::from_rows(&rows, &targets)
            .and_then(|t| fit_pseudoinverse(&t))
            .map_err(|e| e.to_string())?;
        let best = oracle::residual_sse(&rows, &targets, &fit.weights, fit.bias);
        for _ in 0..100 {
            let w: Vec<f64> = (0..width).map(|_| rng.random_range(-2.0..2.0)).collect();
            let b = rng.random_range(-1.0..1.0);
            let probe = oracle::residual_sse(&rows, &targets, &w, b);
            ensure(best <= probe + 1e-12, || {
                format!("probe SSE {probe} beats the fit {best}")
            })?;
        }
        // tiny perturbations of the solution cannot do better either
        for _ in 0..100 {
            let w: Vec<f64> = fit
                .weights
                .iter()
                .map(|v| v + rng.random_range(-1e-3..1e-3))
                .collect();
            let probe = oracle::residual_sse(&rows, &targets, &w, fit.bias);
            ensure(best <= probe + 1e-12, || {
                format!("perturbed SSE {probe} beats the fit {best}")
            })?;
        }
    }
    Ok(())
}

/// After `reset`, a sequence yields the same rows as on a fresh network.
pub fn reset_independence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let genome = random_genome(&mut rng, 5, 4, 5.0);
    let biases = GateBiases {
        forget: 1.5,
        output: -1.5,
    };
    let mut fresh = LstmNetwork::decode(&genome, 4, biases).map_err(|e| e.to_string())?;
    let mut used = fresh.clone();
    let first = SymbolString::new(7).inputs();
    let second = SymbolString::new(4).inputs();
    used.run_sequence(&first, None, InputMode::ExternalOnly)
        .map_err(|e| e.to_string())?;
    used.reset();
    let a = used
        .run_sequence(&second, None, InputMode::ExternalOnly)
        .map_err(|e| e.to_string())?;
    let b = fresh
        .run_sequence(&second, None, InputMode::ExternalOnly)
        .map_err(|e| e.to_string())?;
    ensure(a == b, || "rows depend on the previous sequence".into())
}

/// Cell outputs stay inside (-1, 1) for moderate weights and never leave
/// [-1, 1] even for extreme ones.
pub fn boundedness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for (range, strict) in [(1.0, true), (5.0, false), (1e3, false)] {
        for _ in 0..20 {
            let genome = random_genome(&mut rng, 4, 2, range);
            let mut net = LstmNetwork::decode(&genome, 2, GateBiases::default())
                .map_err(|e| e.to_string())?;
            for _ in 0..30 {
                let u = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let phi = net.step(&u).map_err(|e| e.to_string())?;
                let ok = phi.iter().all(|v| {
                    if strict {
                        v.abs() < 1.0
                    } else {
                        v.abs() <= 1.0
                    }
                });
                ensure(ok, || format!("activation out of range: {phi:?}"))?;
            }
        }
    }
    Ok(())
}

/// Sine fitness is exactly the training SSE plus the validation SSE.
pub fn sse_decomposition() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let series = sine::generate_sine_series(1000);
    for readout in [ReadoutKind::Pseudoinverse, ReadoutKind::Svm] {
        let config = ExperimentConfig {
            readout,
            n_cells: 4,
            ..ExperimentConfig::sine()
        };
        let evaluator = CandidateEvaluator::new(&config).map_err(|e| e.to_string())?;
        let genome = random_genome(&mut rng, 4, 1, 1.0);
        let fitness = evaluator.try_fitness(&genome).map_err(|e| e.to_string())?;
        let mut net = evaluator.decode(&genome).map_err(|e| e.to_string())?;
        let rows = sine::clamped_activations(&mut net, &series, 700).map_err(|e| e.to_string())?;
        let table = sine::training_table(&rows, &series).map_err(|e| e.to_string())?;
        let (train, val) = match readout {
            ReadoutKind::Pseudoinverse => {
                let r = fit_pseudoinverse(&table).map_err(|e| e.to_string())?;
                (
                    sine::segment_sse(&r, &rows, &series, sine::TRAIN),
                    sine::segment_sse(&r, &rows, &series, sine::VALIDATION),
                )
            }
            ReadoutKind::Svm => {
                let r = fit_svr(&table, &config.svm_params().map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                (
                    sine::segment_sse(&r, &rows, &series, sine::TRAIN),
                    sine::segment_sse(&r, &rows, &series, sine::VALIDATION),
                )
            }
        };
        let (train, val) = (
            train.map_err(|e| e.to_string())?,
            val.map_err(|e| e.to_string())?,
        );
        ensure(fitness == train + val, || {
            format!("{readout}: fitness {fitness} != {train} + {val}")
        })?;
    }
    Ok(())
}

/// Switching the readout kind leaves the activation rows untouched.
pub fn readout_swap_rows() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for base in [ExperimentConfig::csl(), ExperimentConfig::sine()] {
        let inputs = base.n_inputs();
        let genome = random_genome(&mut rng, base.n_cells, inputs, 2.0);
        let mut rows = Vec::new();
        for readout in [ReadoutKind::Svm, ReadoutKind::Pseudoinverse] {
            let config = ExperimentConfig {
                readout,
                ..base.clone()
            };
            let evaluator = CandidateEvaluator::new(&config).map_err(|e| e.to_string())?;
            let r = evaluator
                .training_rows(&genome)
                .map_err(|e| e.to_string())?;
            rows.push(
                r.iter()
                    .flatten()
                    .map(|v| v.to_bits())
                    .collect::<Vec<u64>>(),
            );
        }
        ensure(!rows[0].is_empty() && rows[0] == rows[1], || {
            format!("{} rows differ between readouts", base.task)
        })?;
    }
    Ok(())
}

/// Fitness is total and pure: every genome maps to a finite value or +inf,
/// and repeated calls agree.
pub fn fitness_total_and_pure() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for base in [ExperimentConfig::csl(), ExperimentConfig::sine()] {
        for readout in [ReadoutKind::Svm, ReadoutKind::Pseudoinverse] {
            let config = ExperimentConfig {
                readout,
                n_cells: 3,
                ..base.clone()
            };
            let evaluator = CandidateEvaluator::new(&config).map_err(|e| e.to_string())?;
            for range in [0.0, 1.0, 50.0, 1e6] {
                let genome = random_genome(&mut rng, 3, config.n_inputs(), range);
                let a = evaluator.fitness(&genome);
                let b = evaluator.fitness(&genome);
                ensure(!a.is_nan() && a >= 0.0, || format!("fitness {a}"))?;
                ensure(a.to_bits() == b.to_bits(), || {
                    format!("fitness not repeatable: {a} vs {b}")
                })?;
            }
        }
    }
    Ok(())
}

pub type Property = fn() -> Check;

/// Every named property check, in a fixed order.
pub fn property_suite() -> Vec<(&'static str, Property)> {
    vec![
        ("elitism monotonicity", elitism_monotonicity),
        ("subpopulation sizes", subpopulation_sizes_constant),
        ("determinism", evolution_determinism),
        ("cec constancy", cec_constancy),
        ("kernel psd", kernel_psd),
        ("box constraints", box_constraints),
        ("grammar oracle fuzz", grammar_oracle_fuzz),
        ("pseudoinverse vs probes", pseudoinverse_beats_probes),
        ("reset independence", reset_independence),
        ("boundedness", boundedness),
        ("sse decomposition", sse_decomposition),
        ("readout swap rows", readout_swap_rows),
        ("fitness total and pure", fitness_total_and_pure),
    ]
}
