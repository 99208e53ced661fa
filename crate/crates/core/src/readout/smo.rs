//! Sequential minimal optimization for the box-constrained SVM dual
//!
//! ```text
//! min  1/2 a'Qa + p'a   s.t.  y'a = 0,  0 <= a_t <= C
//! Q_ts = y_t y_s K(t mod n, s mod n)
//! ```
//!
//! Classification uses one variable per row (`p = -1`). Epsilon-regression
//! uses two per row, the first `n` with `y = +1` and the next `n` with
//! `y = -1`. Each iteration picks the maximally KKT-violating pair and solves
//! the two-variable subproblem in closed form.

use crate::error::{Error, Result};

use super::KernelCache;

/// Curvature floor for pairs whose kernel distance is zero.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoSettings {
    /// Stop when the maximal violation `m(a) - M(a)` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SmoSettings {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

/// Signs, linear term and box bound of a dual problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DualProblem {
    pub signs: Vec<f64>,
    pub linear: Vec<f64>,
    pub capacity: f64,
}

impl DualProblem {
    pub fn classification(labels: &[f64], capacity: f64) -> Self {
        Self {
            signs: labels.to_vec(),
            linear: vec![-1.0; labels.len()],
            capacity,
        }
    }

    pub fn regression(targets: &[f64], epsilon: f64, capacity: f64) -> Self {
        let n = targets.len();
        let mut signs = vec![1.0; n];
        signs.extend(std::iter::repeat_n(-1.0, n));
        let mut linear: Vec<f64> = targets.iter().map(|d| epsilon - d).collect();
        linear.extend(targets.iter().map(|d| epsilon + d));
        Self {
            signs,
            linear,
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Objective value at `alpha`, evaluated directly from the kernel.
    pub fn objective(&self, cache: &mut KernelCache<'_>, alpha: &[f64]) -> f64 {
        let n = cache.len();
        let mut total = 0.0;
        for (t, &at) in alpha.iter().enumerate() {
            if at == 0.0 {
                continue;
            }
            let yt = self.signs[t];
            let q: f64 = cache.with_row(t % n, |row| {
                alpha
                    .iter()
                    .enumerate()
                    .map(|(s, &as_)| yt * self.signs[s] * row[s % n] * as_)
                    .sum()
            });
            total += at * (0.5 * q + self.linear[t]);
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub gradient: Vec<f64>,
    /// Offset `b` of the decision function `sum_t y_t a_t K(x_t, x) + b`.
    pub bias: f64,
    pub objective: f64,
    /// Final maximal violation `m(a) - M(a)`.
    pub violation: f64,
    pub iterations: usize,
}

pub fn solve_dual(
    cache: &mut KernelCache<'_>,
    problem: &DualProblem,
    settings: SmoSettings,
) -> Result<DualSolution> {
    let n = cache.len();
    let len = problem.len();
    let c = problem.capacity;
    if n == 0 || !len.is_multiple_of(n) {
        return Err(Error::DimensionMismatch(len, n));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "capacity must be positive, got {c}"
        )));
    }
    let y = &problem.signs;
    let diag: Vec<f64> = (0..n).map(|i| cache.entry(i, i)).collect();

    let mut alpha = vec![0.0; len];
    let mut grad = problem.linear.clone();
    let in_up = |t: usize, a: f64| if y[t] > 0.0 { a < c } else { a > 0.0 };
    let in_low = |t: usize, a: f64| if y[t] > 0.0 { a > 0.0 } else { a < c };

    let mut delta = vec![0.0; n];
    let mut iterations = 0;
    let (up_max, low_min) = loop {
        let mut i = usize::MAX;
        let mut up_max = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut low_min = f64::INFINITY;
        for t in 0..len {
            let v = -y[t] * grad[t];
            if in_up(t, alpha[t]) && v > up_max {
                up_max = v;
                i = t;
            }
            if in_low(t, alpha[t]) && v < low_min {
                low_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || up_max - low_min < settings.tol {
            break (up_max, low_min);
        }
        if iterations >= settings.max_iter {
            return Err(Error::NoConvergence(settings.max_iter));
        }
        iterations += 1;

        let (bi, bj) = (i % n, j % n);
        let k_ij = cache.entry(bi, bj);
        let mut curvature = diag[bi] + diag[bj] - 2.0 * k_ij;
        if curvature <= 0.0 {
            curvature = TAU;
        }
        // a_i += y_i s, a_j -= y_j s keeps y'a fixed
        let room_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        let step = ((up_max - low_min) / curvature).min(room_i).min(room_j);
        let clip_i = step == room_i;
        let clip_j = step == room_j;

        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;
        if clip_i {
            alpha[i] = if y[i] > 0.0 { c } else { 0.0 };
        }
        if clip_j {
            alpha[j] = if y[j] > 0.0 { 0.0 } else { c };
        }

        // grad_t += y_t s (K_it - K_jt)
        cache.with_row(bi, |row| delta.copy_from_slice(row));
        cache.with_row(bj, |row| {
            for (d, k) in delta.iter_mut().zip(row) {
                *d = step * (*d - k);
            }
        });
        for (g, ys) in grad.chunks_mut(n).zip(y.chunks(n)) {
            for ((g, yt), d) in g.iter_mut().zip(ys).zip(&delta) {
                *g += yt * d;
            }
        }
    };

    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..len {
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += -y[t] * grad[t];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        match (up_max.is_finite(), low_min.is_finite()) {
            (true, true) => 0.5 * (up_max + low_min),
            (true, false) => up_max,
            (false, true) => low_min,
            (false, false) => 0.0,
        }
    };
    let objective = 0.5
        * alpha
            .iter()
            .zip(&grad)
            .zip(&problem.linear)
            .map(|((a, g), p)| a * (g + p))
            .sum::<f64>();
    let violation = if up_max.is_finite() && low_min.is_finite() {
        (up_max - low_min).max(0.0)
    } else {
        0.0
    };

    Ok(DualSolution {
        alpha,
        gradient: grad,
        bias,
        objective,
        violation,
        iterations,
    })
}
