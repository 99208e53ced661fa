//! Enforced SubPopulations over LSTM memory cells.
//!
//! One subpopulation is kept per memory-cell slot. A candidate network is
//! assembled by drawing one chromosome from every subpopulation; a
//! chromosome's fitness is the mean fitness of the networks it took part in.
//! Reproduction is mutation only: the top quarter of each subpopulation is
//! copied over the bottom quarter and the copies receive Cauchy noise on
//! every weight. When the best fitness stalls, burst mutation re-seeds every
//! subpopulation around the best network found so far.

use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lstm::MemoryCellChromosome;

/// Fitness assigned to candidates whose evaluation failed. Ranked worst.
pub const FAILED_FITNESS: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// Memory cells per network, i.e. number of subpopulations.
    pub n_cells: usize,
    /// Network input channels (including any feedback channel).
    pub n_inputs: usize,
    pub subpop_size: usize,
    pub trials_per_neuron: usize,
    /// Scale of the Cauchy mutation noise.
    pub cauchy_alpha: f64,
    pub weight_init_range: (f64, f64),
    /// Generations without improvement before a burst; `None` disables bursts.
    pub stagnation_window: Option<usize>,
    pub max_generations: usize,
    pub rng_seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            n_cells: 5,
            n_inputs: 4,
            subpop_size: 20,
            trials_per_neuron: 3,
            cauchy_alpha: 0.1,
            weight_init_range: (-5.0, 5.0),
            stagnation_window: Some(10),
            max_generations: 50,
            rng_seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn chromosome_len(&self) -> usize {
        MemoryCellChromosome::expected_len(self.n_inputs, self.n_cells)
    }

    pub fn evaluations_per_generation(&self) -> usize {
        self.subpop_size * self.trials_per_neuron
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_cells == 0 {
            return fail("n_cells must be at least 1".into());
        }
        if self.subpop_size < 4 || !self.subpop_size.is_multiple_of(4) {
            return fail(format!(
                "subpop_size must be a positive multiple of 4, got {}",
                self.subpop_size
            ));
        }
        if self.trials_per_neuron == 0 {
            return fail("trials_per_neuron must be at least 1".into());
        }
        if !(self.cauchy_alpha > 0.0 && self.cauchy_alpha.is_finite()) {
            return fail(format!(
                "cauchy_alpha must be positive, got {}",
                self.cauchy_alpha
            ));
        }
        let (lo, hi) = self.weight_init_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return fail(format!("bad weight_init_range [{lo}, {hi}]"));
        }
        if self.stagnation_window == Some(0) {
            return fail("stagnation_window must be at least 1".into());
        }
        if self.max_generations == 0 {
            return fail("max_generations must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub chromosome: MemoryCellChromosome,
    pub fitness_sum: f64,
    pub trials: usize,
}

impl Member {
    fn fresh(chromosome: MemoryCellChromosome) -> Self {
        Self {
            chromosome,
            fitness_sum: 0.0,
            trials: 0,
        }
    }

    /// Mean fitness over this generation's trials; worst if never evaluated.
    pub fn fitness(&self) -> f64 {
        if self.trials == 0 {
            FAILED_FITNESS
        } else {
            self.fitness_sum / self.trials as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subpopulation {
    pub slot_index: usize,
    pub members: Vec<Member>,
}

impl Subpopulation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn clear_fitness(&mut self) {
        for m in &mut self.members {
            m.fitness_sum = 0.0;
            m.trials = 0;
        }
    }
}

/// Best-so-far summary after one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_genome: Vec<MemoryCellChromosome>,
    pub evaluations_so_far: usize,
    pub burst: bool,
}

/// Outcome of evaluating every assembly in one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationEvaluation {
    pub best_fitness: f64,
    pub best_genome: Vec<MemoryCellChromosome>,
    pub evaluations: usize,
}

fn cauchy_noise<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    Cauchy::new(0.0, alpha)
        .expect("positive finite scale")
        .sample(rng)
}

/// Adds independent Cauchy(0, alpha) noise to every weight.
pub fn mutate<R: Rng + ?Sized>(
    chromosome: &MemoryCellChromosome,
    alpha: f64,
    rng: &mut R,
) -> MemoryCellChromosome {
    let mut child = chromosome.clone();
    for w in child.weights_mut() {
        *w += cauchy_noise(alpha, rng);
        // keep weights finite under heavy-tailed draws
        if !w.is_finite() {
            *w = 0.0;
        }
    }
    child
}

pub fn init_subpopulations<R: Rng + ?Sized>(
    config: &EvolutionConfig,
    rng: &mut R,
) -> Result<Vec<Subpopulation>> {
    config.validate()?;
    let (lo, hi) = config.weight_init_range;
    let len = config.chromosome_len();
    let subpops = (0..config.n_cells)
        .map(|slot_index| Subpopulation {
            slot_index,
            members: (0..config.subpop_size)
                .map(|_| {
                    let weights = (0..len)
                        .map(|_| {
                            if lo == hi {
                                lo
                            } else {
                                rng.random_range(lo..=hi)
                            }
                        })
                        .collect();
                    Member::fresh(MemoryCellChromosome::new(weights).expect("finite range"))
                })
                .collect(),
        })
        .collect();
    Ok(subpops)
}

/// Picks member `indices[s]` from subpopulation `s`, in slot order.
pub fn assemble_network(
    subpops: &[Subpopulation],
    indices: &[usize],
) -> Result<Vec<MemoryCellChromosome>> {
    if indices.len() != subpops.len() {
        return Err(Error::DimensionMismatch(indices.len(), subpops.len()));
    }
    subpops
        .iter()
        .zip(indices)
        .map(|(sp, &index)| {
            sp.members
                .get(index)
                .map(|m| m.chromosome.clone())
                .ok_or(Error::IndexOutOfRange {
                    index,
                    size: sp.len(),
                })
        })
        .collect()
}

/// Evaluates `trials_per_neuron` rounds of assemblies. In every round each
/// subpopulation is shuffled and the k-th network takes the k-th member of
/// each, so every member joins exactly `trials_per_neuron` networks.
/// Non-finite fitness values are recorded as [`FAILED_FITNESS`].
pub fn evaluate_generation<F, R>(
    subpops: &mut [Subpopulation],
    fitness_fn: &F,
    trials_per_neuron: usize,
    rng: &mut R,
) -> Result<GenerationEvaluation>
where
    F: Fn(&[MemoryCellChromosome]) -> f64 + Sync,
    R: Rng + ?Sized,
{
    let size = subpops.first().map_or(0, Subpopulation::len);
    if size == 0 || subpops.iter().any(|sp| sp.len() != size) {
        return Err(Error::InvalidConfig(
            "subpopulations must be non-empty and equally sized".into(),
        ));
    }
    let mut assemblies: Vec<Vec<usize>> = Vec::with_capacity(size * trials_per_neuron);
    for _ in 0..trials_per_neuron {
        let perms: Vec<Vec<usize>> = subpops
            .iter()
            .map(|_| {
                let mut p: Vec<usize> = (0..size).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        assemblies.extend((0..size).map(|k| perms.iter().map(|p| p[k]).collect()));
    }

    let genomes: Vec<Vec<MemoryCellChromosome>> = assemblies
        .iter()
        .map(|idx| assemble_network(subpops, idx))
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = genomes
        .par_iter()
        .map(|g| {
            let f = fitness_fn(g);
            if f.is_finite() {
                f
            } else {
                FAILED_FITNESS
            }
        })
        .collect();

    let mut best = 0;
    for (k, (idx, &score)) in assemblies.iter().zip(&scores).enumerate() {
        for (sp, &i) in subpops.iter_mut().zip(idx) {
            sp.members[i].fitness_sum += score;
            sp.members[i].trials += 1;
        }
        if score < scores[best] {
            best = k;
        }
    }
    Ok(GenerationEvaluation {
        best_fitness: scores[best],
        best_genome: genomes[best].clone(),
        evaluations: scores.len(),
    })
}

/// Sorts by mean fitness (best first) and overwrites the worst quarter with
/// mutated copies of the best quarter. Fitness accumulators are cleared.
pub fn select_and_mutate<R: Rng + ?Sized>(subpop: &mut Subpopulation, alpha: f64, rng: &mut R) {
    subpop
        .members
        .sort_by(|a, b| a.fitness().total_cmp(&b.fitness()));
    let size = subpop.len();
    let quarter = size / 4;
    for k in 0..quarter {
        let child = mutate(&subpop.members[k].chromosome, alpha, rng);
        subpop.members[size - quarter + k] = Member::fresh(child);
    }
    subpop.clear_fitness();
}

/// Re-seeds every subpopulation around `best_genome`: slot `s` keeps one exact
/// copy of `best_genome[s]` and fills the rest with mutated copies of it.
pub fn burst_mutate<R: Rng + ?Sized>(
    subpops: &mut [Subpopulation],
    best_genome: &[MemoryCellChromosome],
    alpha: f64,
    rng: &mut R,
) -> Result<()> {
    if best_genome.len() != subpops.len() {
        return Err(Error::DimensionMismatch(best_genome.len(), subpops.len()));
    }
    for (sp, best) in subpops.iter_mut().zip(best_genome) {
        for (k, member) in sp.members.iter_mut().enumerate() {
            let chromosome = if k == 0 {
                best.clone()
            } else {
                mutate(best, alpha, rng)
            };
            *member = Member::fresh(chromosome);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOutcome {
    pub best_genome: Vec<MemoryCellChromosome>,
    pub best_fitness: f64,
    pub history: Vec<FitnessRecord>,
}

pub fn evolve<F>(config: &EvolutionConfig, fitness_fn: F) -> Result<EvolutionOutcome>
where
    F: Fn(&[MemoryCellChromosome]) -> f64 + Sync,
{
    evolve_with(config, fitness_fn, |_| ControlFlow::Continue(()))
}

/// Runs evolution, calling `observer` after each generation's record is
/// pushed; returning `Break` stops the run early.
pub fn evolve_with<F, O>(
    config: &EvolutionConfig,
    fitness_fn: F,
    mut observer: O,
) -> Result<EvolutionOutcome>
where
    F: Fn(&[MemoryCellChromosome]) -> f64 + Sync,
    O: FnMut(&FitnessRecord) -> ControlFlow<()>,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut subpops = init_subpopulations(config, &mut rng)?;

    let mut best_fitness = f64::INFINITY;
    let mut best_genome: Option<Vec<MemoryCellChromosome>> = None;
    let mut evaluations = 0;
    let mut stale = 0;
    let mut history = Vec::with_capacity(config.max_generations);
    let mut burst_pending = false;

    for generation in 0..config.max_generations {
        let gen_eval = evaluate_generation(
            &mut subpops,
            &fitness_fn,
            config.trials_per_neuron,
            &mut rng,
        )?;
        evaluations += gen_eval.evaluations;
        if best_genome.is_none() || gen_eval.best_fitness < best_fitness {
            best_fitness = gen_eval.best_fitness;
            best_genome = Some(gen_eval.best_genome);
            stale = 0;
        } else {
            stale += 1;
        }
        let best = best_genome.clone().expect("set after first generation");
        history.push(FitnessRecord {
            generation,
            best_fitness,
            best_genome: best.clone(),
            evaluations_so_far: evaluations,
            burst: burst_pending,
        });
        burst_pending = false;
        if observer(history.last().expect("just pushed")).is_break() || best_fitness <= 0.0 {
            break;
        }
        if config.stagnation_window.is_some_and(|w| stale >= w) {
            burst_mutate(&mut subpops, &best, config.cauchy_alpha, &mut rng)?;
            stale = 0;
            burst_pending = true;
        } else {
            for sp in &mut subpops {
                select_and_mutate(sp, config.cauchy_alpha, &mut rng);
            }
        }
    }

    Ok(EvolutionOutcome {
        best_genome: best_genome.expect("at least one generation"),
        best_fitness,
        history,
    })
}
