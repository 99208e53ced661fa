use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

use super::ActivationTable;

/// Tables with at most this many rows get a fully materialized Gram matrix.
pub const FULL_GRAM_LIMIT: usize = 4000;

/// Budget for the row cache used above [`FULL_GRAM_LIMIT`], in f64 entries.
const ROW_CACHE_ENTRIES: usize = 32 << 20;

/// Gaussian kernel `K(x, y) = exp(-|x - y|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub sigma: f64,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "kernel sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    /// Unchecked evaluation; callers guarantee equal lengths.
    #[inline]
    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-d2 / (2.0 * self.sigma * self.sigma)).exp()
    }
}

pub fn gaussian_kernel(x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    Ok(KernelSpec::gaussian(sigma)?.eval(x, y))
}

/// Kernel rows over the rows of an activation table.
pub enum KernelCache<'a> {
    Full {
        n: usize,
        gram: Vec<f64>,
    },
    Rows {
        table: &'a ActivationTable,
        kernel: KernelSpec,
        capacity: usize,
        rows: HashMap<usize, Vec<f64>>,
        recency: VecDeque<usize>,
    },
}

impl<'a> KernelCache<'a> {
    pub fn new(table: &'a ActivationTable, kernel: KernelSpec) -> Self {
        Self::with_limit(table, kernel, FULL_GRAM_LIMIT)
    }

    pub fn with_limit(table: &'a ActivationTable, kernel: KernelSpec, full_limit: usize) -> Self {
        let n = table.len();
        if n <= full_limit {
            let mut gram = vec![0.0; n * n];
            for i in 0..n {
                gram[i * n + i] = kernel.eval(table.row(i), table.row(i));
                for j in 0..i {
                    let k = kernel.eval(table.row(i), table.row(j));
                    gram[i * n + j] = k;
                    gram[j * n + i] = k;
                }
            }
            KernelCache::Full { n, gram }
        } else {
            KernelCache::Rows {
                table,
                kernel,
                capacity: (ROW_CACHE_ENTRIES / n.max(1)).max(2),
                rows: HashMap::new(),
                recency: VecDeque::new(),
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            KernelCache::Full { n, .. } => *n,
            KernelCache::Rows { table, .. } => table.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f` with kernel row `i`.
    pub fn with_row<R>(&mut self, i: usize, f: impl FnOnce(&[f64]) -> R) -> R {
        match self {
            KernelCache::Full { n, gram } => f(&gram[i * *n..(i + 1) * *n]),
            KernelCache::Rows {
                table,
                kernel,
                capacity,
                rows,
                recency,
            } => {
                if rows.contains_key(&i) {
                    if let Some(pos) = recency.iter().position(|&r| r == i) {
                        recency.remove(pos);
                    }
                } else {
                    if rows.len() >= *capacity {
                        if let Some(old) = recency.pop_front() {
                            rows.remove(&old);
                        }
                    }
                    let xi = table.row(i);
                    let row = (0..table.len())
                        .map(|j| kernel.eval(xi, table.row(j)))
                        .collect();
                    rows.insert(i, row);
                }
                recency.push_back(i);
                f(&rows[&i])
            }
        }
    }

    pub fn entry(&mut self, i: usize, j: usize) -> f64 {
        self.with_row(i, |r| r[j])
    }
}
