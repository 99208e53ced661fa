//! Forget-gate LSTM memory-cell networks decoded from per-cell chromosomes.
//!
//! Each memory cell is described by one chromosome of `4 * (I + H)` weights,
//! laid out as four blocks (cell input, input gate, forget gate, output gate).
//! Every block holds the `I` external-input weights followed by the `H`
//! recurrent weights from the previous step's cell outputs. Gate biases are
//! not part of the genome; they are fixed constants supplied at decode time.

use crate::error::{Error, Result};

/// Number of weight blocks per memory cell.
pub const BLOCKS_PER_CELL: usize = 4;

/// Value of the feedback channel at the first step of a backprojected run.
pub const INITIAL_FEEDBACK: f64 = 0.0;

const CELL_INPUT: usize = 0;
const INPUT_GATE: usize = 1;
const FORGET_GATE: usize = 2;
const OUTPUT_GATE: usize = 3;

/// Weight string for a single memory cell; the unit of evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryCellChromosome(Vec<f64>);

impl MemoryCellChromosome {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::MalformedGenome(
                "chromosome contains a non-finite weight".into(),
            ));
        }
        Ok(Self(weights))
    }

    /// Length of a chromosome for a network with `n_inputs` inputs and `n_cells` cells.
    pub fn expected_len(n_inputs: usize, n_cells: usize) -> usize {
        BLOCKS_PER_CELL * (n_inputs + n_cells)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fixed bias constants added to the forget and output gate pre-activations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GateBiases {
    pub forget: f64,
    pub output: f64,
}

/// How the network's input vector is formed at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    /// Only the external inputs are presented.
    ExternalOnly,
    /// The previous scalar output is appended after the external inputs.
    Backprojected,
}

impl InputMode {
    /// Number of network input channels for `n_external` external inputs.
    pub fn effective_inputs(self, n_external: usize) -> usize {
        match self {
            InputMode::ExternalOnly => n_external,
            InputMode::Backprojected => n_external + 1,
        }
    }
}

#[inline]
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// A decoded LSTM network with mutable cell state.
#[derive(Debug, Clone)]
pub struct LstmNetwork {
    n_inputs: usize,
    n_cells: usize,
    /// Row-major `[cell][block][I + H]`.
    weights: Vec<f64>,
    biases: GateBiases,
    cell_states: Vec<f64>,
    cell_outputs: Vec<f64>,
    // concatenated (input, previous outputs)
    scratch: Vec<f64>,
}

impl LstmNetwork {
    /// Builds a network from one chromosome per memory cell.
    pub fn decode(
        chromosomes: &[MemoryCellChromosome],
        n_inputs: usize,
        biases: GateBiases,
    ) -> Result<Self> {
        let n_cells = chromosomes.len();
        if n_cells == 0 {
            return Err(Error::MalformedGenome("genome has no memory cells".into()));
        }
        let expected = MemoryCellChromosome::expected_len(n_inputs, n_cells);
        let mut weights = Vec::with_capacity(expected * n_cells);
        for (slot, chromosome) in chromosomes.iter().enumerate() {
            if chromosome.len() != expected {
                return Err(Error::MalformedGenome(format!(
                    "chromosome {slot} has {} weights, expected 4*({n_inputs}+{n_cells}) = {expected}",
                    chromosome.len()
                )));
            }
            weights.extend_from_slice(chromosome.weights());
        }
        if !biases.forget.is_finite() || !biases.output.is_finite() {
            return Err(Error::MalformedGenome("non-finite gate bias".into()));
        }
        Ok(Self {
            n_inputs,
            n_cells,
            weights,
            biases,
            cell_states: vec![0.0; n_cells],
            cell_outputs: vec![0.0; n_cells],
            scratch: vec![0.0; n_inputs + n_cells],
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn biases(&self) -> GateBiases {
        self.biases
    }

    pub fn cell_states(&self) -> &[f64] {
        &self.cell_states
    }

    pub fn cell_outputs(&self) -> &[f64] {
        &self.cell_outputs
    }

    /// Weight block `block` (0 = cell input, 1 = input gate, 2 = forget, 3 = output) of `cell`.
    pub fn block(&self, cell: usize, block: usize) -> &[f64] {
        let fan_in = self.n_inputs + self.n_cells;
        let start = (cell * BLOCKS_PER_CELL + block) * fan_in;
        &self.weights[start..start + fan_in]
    }

    pub fn reset(&mut self) {
        self.cell_states.iter_mut().for_each(|s| *s = 0.0);
        self.cell_outputs.iter_mut().for_each(|o| *o = 0.0);
    }

    /// Advances the network one time step and returns the new cell outputs.
    pub fn step(&mut self, input: &[f64]) -> Result<&[f64]> {
        if input.len() != self.n_inputs {
            return Err(Error::InputLength {
                expected: self.n_inputs,
                got: input.len(),
            });
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        self.scratch[..self.n_inputs].copy_from_slice(input);
        self.scratch[self.n_inputs..].copy_from_slice(&self.cell_outputs);

        let fan_in = self.n_inputs + self.n_cells;
        let x = &self.scratch;
        for cell in 0..self.n_cells {
            let base = cell * BLOCKS_PER_CELL * fan_in;
            let dot = |block: usize| -> f64 {
                let w = &self.weights[base + block * fan_in..base + (block + 1) * fan_in];
                w.iter().zip(x).map(|(a, b)| a * b).sum()
            };
            let net_cell = dot(CELL_INPUT);
            let net_in = dot(INPUT_GATE);
            let net_forget = dot(FORGET_GATE) + self.biases.forget;
            let net_out = dot(OUTPUT_GATE) + self.biases.output;

            let state =
                logistic(net_forget) * self.cell_states[cell] + logistic(net_in) * net_cell.tanh();
            self.cell_states[cell] = state;
            self.cell_outputs[cell] = logistic(net_out) * state.tanh();
        }
        Ok(&self.cell_outputs)
    }

    /// Propagates a whole sequence and returns one activation row per step.
    ///
    /// In [`InputMode::Backprojected`] the teacher sequence is required: step
    /// `t` receives `teacher[t - 1]` on the feedback channel and step 0
    /// receives [`INITIAL_FEEDBACK`]. The network is not reset first.
    pub fn run_sequence(
        &mut self,
        inputs: &[Vec<f64>],
        teacher: Option<&[f64]>,
        mode: InputMode,
    ) -> Result<Vec<Vec<f64>>> {
        let mut rows = Vec::with_capacity(inputs.len());
        match mode {
            InputMode::ExternalOnly => {
                for u in inputs {
                    rows.push(self.step(u)?.to_vec());
                }
            }
            InputMode::Backprojected => {
                let teacher = teacher.unwrap_or(&[]);
                if teacher.len() != inputs.len() {
                    return Err(Error::TeacherLength {
                        expected: inputs.len(),
                        got: teacher.len(),
                    });
                }
                let mut x = Vec::with_capacity(self.n_inputs);
                let mut feedback = INITIAL_FEEDBACK;
                for (u, &target) in inputs.iter().zip(teacher) {
                    x.clear();
                    x.extend_from_slice(u);
                    x.push(feedback);
                    rows.push(self.step(&x)?.to_vec());
                    feedback = target;
                }
            }
        }
        Ok(rows)
    }

    /// Runs in backprojected mode, feeding back the network's own predictions.
    ///
    /// `readout` maps each activation row to the scalar output that becomes the
    /// feedback value of the next step. `initial_feedback` is fed at the first
    /// step. Returns the activation rows and the predictions.
    pub fn run_free<F>(
        &mut self,
        inputs: &[Vec<f64>],
        initial_feedback: f64,
        mut readout: F,
    ) -> Result<(Vec<Vec<f64>>, Vec<f64>)>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let mut rows = Vec::with_capacity(inputs.len());
        let mut predictions = Vec::with_capacity(inputs.len());
        let mut x = Vec::with_capacity(self.n_inputs);
        let mut feedback = initial_feedback;
        for u in inputs {
            x.clear();
            x.extend_from_slice(u);
            x.push(feedback);
            let phi = self.step(&x)?;
            let y = readout(phi)?;
            rows.push(phi.to_vec());
            predictions.push(y);
            feedback = y;
        }
        Ok((rows, predictions))
    }
}
