//! Numerical cross-checks of the solvers against the slow reference
//! implementations in [`crate::oracle`].

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lstm::{GateBiases, LstmNetwork, MemoryCellChromosome};
use crate::neuroevolution::mutate;
use crate::oracle;
use crate::readout::{fit_pseudoinverse, fit_svc, fit_svr, ActivationTable, SvmParams};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

const SMO_OBJECTIVE_TOL: f64 = 1e-6;
const PI_RESIDUAL_TOL: f64 = 1e-8;
const LSTM_TOL: f64 = 1e-12;

fn random_rows(rng: &mut ChaCha8Rng, n: usize, width: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..width).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// Largest gap between the SMO dual objective and the active-set enumeration
/// oracle over `problems` random classification problems and as many
/// regression problems.
pub fn smo_vs_oracle(problems: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failure = None;
    for k in 0..2 * problems {
        let n = rng.random_range(2..=8);
        let width = rng.random_range(1..=3);
        let rows = random_rows(&mut rng, n, width);
        let sigma = rng.random_range(0.5..2.0);
        let c = rng.random_range(0.5..10.0);
        let table_targets: Vec<f64>;
        let (model, oracle_objective) = if k % 2 == 0 {
            let mut labels: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            labels[0] = 1.0;
            labels[1] = -1.0;
            table_targets = labels;
            let params = SvmParams::new(sigma, c, 0.0).map(|p| p.with_tol(1e-10));
            let fitted = params
                .and_then(|p| fit_svc(&ActivationTable::from_rows(&rows, &table_targets)?, &p));
            let o = oracle::svc_dual_oracle(&rows, &table_targets, sigma, c);
            (fitted, o.objective)
        } else {
            let eps = rng.random_range(0.0..0.2);
            table_targets = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let params = SvmParams::new(sigma, c, eps).map(|p| p.with_tol(1e-10));
            let fitted = params
                .and_then(|p| fit_svr(&ActivationTable::from_rows(&rows, &table_targets)?, &p));
            let o = oracle::svr_dual_oracle(&rows, &table_targets, sigma, c, eps);
            (fitted, o.objective)
        };
        match model {
            Ok(m) => worst = worst.max((m.dual_objective() - oracle_objective).abs()),
            Err(e) => {
                failure.get_or_insert(format!("problem {k}: {e}"));
            }
        }
    }
    CheckResult {
        name: "smo dual objective vs active-set enumeration oracle",
        passed: failure.is_none() && worst <= SMO_OBJECTIVE_TOL,
        detail: failure.unwrap_or_else(|| {
            format!("max gap {worst:.3e} over {problems} svc + {problems} svr problems")
        }),
    }
}

/// Largest gap between the pseudoinverse residual and the normal-equations
/// residual over random `rows x width` tables.
pub fn pseudoinverse_vs_normal_equations(
    tables: usize,
    rows: usize,
    width: usize,
    seed: u64,
) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failure = None;
    for k in 0..tables {
        let x = random_rows(&mut rng, rows, width);
        let d: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fitted = ActivationTable::from_rows(&x, &d).and_then(|t| fit_pseudoinverse(&t));
        let reference = oracle::normal_equations_least_squares(&x, &d);
        match (fitted, reference) {
            (Ok(model), Some((w, b))) => {
                let ours = oracle::residual_sse(&x, &d, &model.weights, model.bias);
                let theirs = oracle::residual_sse(&x, &d, &w, b);
                worst = worst.max((ours - theirs).abs());
            }
            (Err(e), _) => {
                failure.get_or_insert(format!("table {k}: {e}"));
            }
            (_, None) => {
                failure.get_or_insert(format!("table {k}: singular normal equations"));
            }
        }
    }
    CheckResult {
        name: "pseudoinverse residual vs normal equations",
        passed: failure.is_none() && worst <= PI_RESIDUAL_TOL,
        detail: failure.unwrap_or_else(|| format!("max gap {worst:.3e} over {tables} tables")),
    }
}

/// One cell, one input, every weight 1, zero biases, input 1 from rest.
pub fn lstm_scalar_example() -> CheckResult {
    let sig = 1.0 / (1.0 + (-1.0f64).exp());
    let s_hand = sig * 1.0f64.tanh();
    let phi_hand = sig * s_hand.tanh();
    let (s_oracle, phi_oracle) =
        oracle::lstm_cell_scalar([(1.0, 1.0); 4], (0.0, 0.0), 1.0, 0.0, 0.0);
    let result = MemoryCellChromosome::new(vec![1.0; 8])
        .and_then(|c| LstmNetwork::decode(&[c], 1, GateBiases::default()))
        .and_then(|mut net| {
            let phi = net.step(&[1.0])?[0];
            Ok((net.cell_states()[0], phi))
        });
    match result {
        Ok((s, phi)) => {
            let gap = [
                (s - s_hand).abs(),
                (phi - phi_hand).abs(),
                (s - s_oracle).abs(),
                (phi - phi_oracle).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            CheckResult {
                name: "lstm step vs hand-computed example",
                passed: gap <= LSTM_TOL,
                detail: format!("s = {s:.6}, phi = {phi:.6}, max gap {gap:.3e}"),
            }
        }
        Err(e) => CheckResult {
            name: "lstm step vs hand-computed example",
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Median `|noise|` of the mutation operator applied to zero weights.
pub fn cauchy_median(alpha: f64, samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = MemoryCellChromosome::new(vec![0.0; samples]).map(|c| {
        let noisy = mutate(&c, alpha, &mut rng);
        let mut v: Vec<f64> = noisy.weights().iter().map(|w| w.abs()).collect();
        v.sort_by(f64::total_cmp);
        v[samples / 2]
    });
    let reference = oracle::cauchy_abs_median_by_inversion(alpha, samples, seed);
    let (lo, hi) = (0.8 * alpha, 1.2 * alpha);
    match result {
        Ok(median) => CheckResult {
            name: "cauchy mutation median |noise|",
            passed: (lo..=hi).contains(&median) && (lo..=hi).contains(&reference),
            detail: format!(
                "median {median:.4} (inversion reference {reference:.4}), band [{lo:.3}, {hi:.3}]"
            ),
        },
        Err(e) => CheckResult {
            name: "cauchy mutation median |noise|",
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Every oracle check with its default sizes.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        smo_vs_oracle(10, seed),
        pseudoinverse_vs_normal_equations(10, 50, 10, seed),
        lstm_scalar_example(),
        cauchy_median(0.1, 20_000, seed),
    ]
}
