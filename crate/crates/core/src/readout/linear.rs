use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::{ActivationTable, Readout};

/// Linear output map `y = w . phi + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearReadout {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Readout for LinearReadout {
    fn predict(&self, phi: &[f64]) -> Result<f64> {
        if phi.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(phi.len(), self.weights.len()));
        }
        Ok(self.bias
            + self
                .weights
                .iter()
                .zip(phi)
                .map(|(w, x)| w * x)
                .sum::<f64>())
    }
}

fn min_norm_solve(design: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = design.shape();
    let svd = design.svd(true, true);
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = largest * rows.max(cols) as f64 * f64::EPSILON;
    svd.solve(&rhs, cutoff)
        .map_err(|e| Error::InvalidConfig(format!("pseudoinverse failed: {e}")))
}

/// Least-squares fit of weights and bias; minimum-norm weights when the
/// activations are rank deficient. The bias is not part of the penalized norm.
pub fn fit_pseudoinverse(table: &ActivationTable) -> Result<LinearReadout> {
    let (n, width) = (table.len(), table.width());
    if n == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let mut mean = vec![0.0; width];
    for row in table.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let target_mean = table.targets().iter().sum::<f64>() / n as f64;
    let design = DMatrix::from_fn(n, width, |i, j| table.row(i)[j] - mean[j]);
    let rhs = DVector::from_iterator(n, table.targets().iter().map(|d| d - target_mean));
    let w = min_norm_solve(design, rhs)?;
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = target_mean - weights.iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>();
    Ok(LinearReadout { weights, bias })
}

/// Minimum-norm least squares through the origin (bias fixed at 0).
pub fn fit_pseudoinverse_without_bias(table: &ActivationTable) -> Result<LinearReadout> {
    let (n, width) = (table.len(), table.width());
    if n == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let design = DMatrix::from_fn(n, width, |i, j| table.row(i)[j]);
    let rhs = DVector::from_column_slice(table.targets());
    let w = min_norm_solve(design, rhs)?;
    Ok(LinearReadout {
        weights: w.iter().copied().collect(),
        bias: 0.0,
    })
}
