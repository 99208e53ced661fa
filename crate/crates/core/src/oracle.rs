//! Independent reference computations used to check the production code paths.
//!
//! Nothing here is called by the fitting, evolution or task code. Each routine
//! is a deliberately plain, slow computation of a quantity the library
//! computes another way: exhaustive active-set search instead of SMO, normal equations
//! instead of the SVD pseudoinverse, prefix enumeration instead of counting
//! rules, and an explicit scalar evaluation of one LSTM step.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gaussian Gram matrix computed entry by entry.
pub fn gram(rows: &[Vec<f64>], sigma: f64) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|a| {
            rows.iter()
                .map(|b| {
                    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
                    (-d2 / (2.0 * sigma * sigma)).exp()
                })
                .collect()
        })
        .collect()
}

/// Solution of a dual QP found by the oracle.
#[derive(Debug, Clone)]
pub struct QpOracleResult {
    pub alpha: Vec<f64>,
    pub objective: f64,
    /// Number of active-set assignments whose reduced KKT system was solved.
    pub candidates: usize,
}

fn qp_objective(q: &[Vec<f64>], p: &[f64], a: &[f64]) -> f64 {
    let n = p.len();
    let mut total = 0.0;
    for i in 0..n {
        let qa: f64 = (0..n).map(|j| q[i][j] * a[j]).sum();
        total += a[i] * (0.5 * qa + p[i]);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Lower,
    Upper,
    Free,
}

/// Exhaustive active-set search for
/// `min 1/2 a'Qa + p'a  s.t. y'a = 0, 0 <= a <= c`.
///
/// Every variable is tried at its lower bound, its upper bound, or free. For
/// each assignment the equality-constrained problem over the free variables
/// is solved from its KKT system; assignments whose free values leave the box
/// are discarded. The best surviving point is the optimum. `exclusive` lists
/// pairs of variables that may not both be nonzero, which prunes the search
/// without excluding the optimum of a regression dual.
pub fn enumerate_qp(
    q: &[Vec<f64>],
    p: &[f64],
    y: &[f64],
    c: f64,
    exclusive: &[(usize, usize)],
) -> QpOracleResult {
    let n = p.len();
    let mut states = vec![State::Lower; n];
    let mut best = QpOracleResult {
        alpha: vec![0.0; n],
        objective: f64::INFINITY,
        candidates: 0,
    };
    loop {
        let allowed = exclusive
            .iter()
            .all(|&(i, j)| states[i] == State::Lower || states[j] == State::Lower);
        if allowed {
            if let Some(a) = reduced_solution(q, p, y, c, &states) {
                best.candidates += 1;
                let f = qp_objective(q, p, &a);
                if f < best.objective {
                    best.objective = f;
                    best.alpha = a;
                }
            }
        }
        // next assignment in base 3
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            states[k] = match states[k] {
                State::Lower => State::Upper,
                State::Upper => State::Free,
                State::Free => State::Lower,
            };
            if states[k] != State::Lower {
                break;
            }
            k += 1;
        }
    }
}

fn reduced_solution(
    q: &[Vec<f64>],
    p: &[f64],
    y: &[f64],
    c: f64,
    states: &[State],
) -> Option<Vec<f64>> {
    let n = p.len();
    let mut a: Vec<f64> = states
        .iter()
        .map(|s| if *s == State::Upper { c } else { 0.0 })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| states[i] == State::Free).collect();
    let fixed_balance: f64 = (0..n).map(|i| y[i] * a[i]).sum();
    if free.is_empty() {
        return (fixed_balance.abs() <= 1e-12 * c.max(1.0)).then_some(a);
    }
    // [Q_FF y_F; y_F' 0] [a_F; lambda] = [-(p_F + Q_F,fixed a_fixed); -y_fixed' a_fixed]
    let m = free.len();
    let mut lhs = vec![vec![0.0; m + 1]; m + 1];
    let mut rhs = vec![0.0; m + 1];
    for (r, &i) in free.iter().enumerate() {
        for (k, &j) in free.iter().enumerate() {
            lhs[r][k] = q[i][j];
        }
        lhs[r][m] = y[i];
        lhs[m][r] = y[i];
        rhs[r] = -p[i] - (0..n).map(|j| q[i][j] * a[j]).sum::<f64>();
    }
    rhs[m] = -fixed_balance;
    let sol = gauss_solve(lhs, rhs)?;
    for (r, &i) in free.iter().enumerate() {
        let v = sol[r];
        if !(v > 0.0 && v < c) {
            return None;
        }
        a[i] = v;
    }
    Some(a)
}

/// Dual of soft-margin classification: `Q = y y' * K`, `p = -1`.
pub fn svc_dual_oracle(rows: &[Vec<f64>], labels: &[f64], sigma: f64, c: f64) -> QpOracleResult {
    let k = gram(rows, sigma);
    let n = rows.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| labels[i] * labels[j] * k[i][j]).collect())
        .collect();
    enumerate_qp(&q, &vec![-1.0; n], labels, c, &[])
}

/// Dual of epsilon-regression over `[a+; a-]`.
pub fn svr_dual_oracle(
    rows: &[Vec<f64>],
    targets: &[f64],
    sigma: f64,
    c: f64,
    epsilon: f64,
) -> QpOracleResult {
    let k = gram(rows, sigma);
    let n = rows.len();
    let y: Vec<f64> = (0..2 * n).map(|t| if t < n { 1.0 } else { -1.0 }).collect();
    let q: Vec<Vec<f64>> = (0..2 * n)
        .map(|t| (0..2 * n).map(|s| y[t] * y[s] * k[t % n][s % n]).collect())
        .collect();
    let p: Vec<f64> = (0..2 * n)
        .map(|t| {
            if t < n {
                epsilon - targets[t]
            } else {
                epsilon + targets[t - n]
            }
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i + n)).collect();
    enumerate_qp(&q, &p, &y, c, &pairs)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least squares with a bias column via the normal equations. Returns
/// `(weights, bias)`; `None` if the normal matrix is singular.
pub fn normal_equations_least_squares(
    rows: &[Vec<f64>],
    targets: &[f64],
) -> Option<(Vec<f64>, f64)> {
    let width = rows.first()?.len();
    let dim = width + 1;
    let mut ata = vec![vec![0.0; dim]; dim];
    let mut atb = vec![0.0; dim];
    for (row, d) in rows.iter().zip(targets) {
        let x: Vec<f64> = row.iter().copied().chain(std::iter::once(1.0)).collect();
        for i in 0..dim {
            atb[i] += x[i] * d;
            for j in 0..dim {
                ata[i][j] += x[i] * x[j];
            }
        }
    }
    let mut sol = gauss_solve(ata, atb)?;
    let bias = sol.pop()?;
    Some((sol, bias))
}

/// Sum of squared residuals of a linear model.
pub fn residual_sse(rows: &[Vec<f64>], targets: &[f64], weights: &[f64], bias: f64) -> f64 {
    rows.iter()
        .zip(targets)
        .map(|(r, d)| {
            let y = bias + r.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
            (y - d).powi(2)
        })
        .sum()
}

/// One LSTM step for a single cell with one input, scalar arithmetic only.
/// Weights are `(cell, input gate, forget, output)` pairs of
/// `(input weight, recurrent weight)`.
pub fn lstm_cell_scalar(
    weights: [(f64, f64); 4],
    biases: (f64, f64),
    input: f64,
    state: f64,
    output: f64,
) -> (f64, f64) {
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let pre = |k: usize| weights[k].0 * input + weights[k].1 * output;
    let s = sig(pre(2) + biases.0) * state + sig(pre(1)) * pre(0).tanh();
    (s, sig(pre(3) + biases.1) * s.tanh())
}

/// Symbols of the `a^n b^n c^n` language, with `'T'` as terminator.
pub fn language_string(n: usize) -> String {
    format!("{}{}{}T", "a".repeat(n), "b".repeat(n), "c".repeat(n))
}

/// Legal continuations of `prefix` (symbols after the start symbol) found by
/// enumerating every language string with `n <= max_n`.
pub fn legal_next_by_enumeration(prefix: &str, max_n: usize) -> Vec<char> {
    let mut next: Vec<char> = (1..=max_n)
        .map(language_string)
        .filter(|w| w.len() > prefix.len() && w.starts_with(prefix))
        .map(|w| w.as_bytes()[prefix.len()] as char)
        .collect();
    next.sort_unstable();
    next.dedup();
    next
}

/// Median of `|X|` over `samples` draws of a Cauchy variable with scale
/// `alpha`, generated by inverse CDF from uniforms.
pub fn cauchy_abs_median_by_inversion(alpha: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..samples)
        .map(|_| {
            let u: f64 = rng.random();
            (alpha * (std::f64::consts::PI * (u - 0.5)).tan()).abs()
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v[samples / 2]
}
