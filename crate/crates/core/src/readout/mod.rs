//! Output layers fitted per candidate network: support-vector machines over a
//! Gaussian kernel, and a least-squares linear map via the pseudoinverse.

mod kernel;
mod linear;
mod smo;
mod svm;

pub use kernel::{gaussian_kernel, KernelCache, KernelSpec, FULL_GRAM_LIMIT};
pub use linear::{fit_pseudoinverse, fit_pseudoinverse_without_bias, LinearReadout};
pub use smo::{solve_dual, DualProblem, DualSolution, SmoSettings};
pub use svm::{fit_svc, fit_svr, SvmModel, SvmParams, SvmTask};

use crate::error::{Error, Result};

/// Anything that maps an activation vector to a scalar output.
pub trait Readout {
    fn predict(&self, phi: &[f64]) -> Result<f64>;
}

/// Activation rows (one per time step, over all training sequences) with
/// aligned scalar targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTable {
    width: usize,
    data: Vec<f64>,
    targets: Vec<f64>,
    boundaries: Vec<usize>,
}

impl ActivationTable {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            data: Vec::new(),
            targets: Vec::new(),
            boundaries: Vec::new(),
        }
    }

    /// A table holding a single sequence.
    pub fn from_rows(rows: &[Vec<f64>], targets: &[f64]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let mut table = Self::new(width);
        table.push_sequence(rows, targets)?;
        Ok(table)
    }

    /// Appends one sequence's rows as a new contiguous block.
    pub fn push_sequence(&mut self, rows: &[Vec<f64>], targets: &[f64]) -> Result<()> {
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch(rows.len(), targets.len()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != self.width) {
            return Err(Error::DimensionMismatch(bad.len(), self.width));
        }
        self.boundaries.push(self.targets.len());
        for row in rows {
            self.data.extend_from_slice(row);
        }
        self.targets.extend_from_slice(targets);
        Ok(())
    }

    /// Same rows and boundaries, different targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self> {
        if targets.len() != self.len() {
            return Err(Error::DimensionMismatch(targets.len(), self.len()));
        }
        Ok(Self {
            targets,
            ..self.clone()
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Start index of each sequence block.
    pub fn sequence_boundaries(&self) -> &[usize] {
        &self.boundaries
    }
}
