use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::{
    solve_dual, ActivationTable, DualProblem, KernelCache, KernelSpec, Readout, SmoSettings,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvmTask {
    Classification,
    Regression,
}

impl SvmTask {
    fn name(self) -> &'static str {
        match self {
            SvmTask::Classification => "classification",
            SvmTask::Regression => "regression",
        }
    }
}

/// Hyperparameters of a support-vector fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub kernel: KernelSpec,
    /// Box constraint C on the dual coefficients.
    pub capacity: f64,
    /// Half-width of the insensitive tube (regression only).
    pub epsilon: f64,
    pub smo: SmoSettings,
}

impl SvmParams {
    pub fn new(sigma: f64, capacity: f64, epsilon: f64) -> Result<Self> {
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "capacity must be positive, got {capacity}"
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        Ok(Self {
            kernel: KernelSpec::gaussian(sigma)?,
            capacity,
            epsilon,
            smo: SmoSettings::default(),
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.smo.tol = tol;
        self
    }
}

/// A fitted kernel expansion `y = w0 + sum_j w_j K(phi, s_j)` over its support rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    width: usize,
    support: Vec<f64>,
    coefficients: Vec<f64>,
    bias: f64,
    kernel: KernelSpec,
    capacity: f64,
    epsilon: f64,
    task: SvmTask,
    objective: f64,
}

impl SvmModel {
    pub fn support_len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn support_row(&self, k: usize) -> &[f64] {
        &self.support[k * self.width..(k + 1) * self.width]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn task(&self) -> SvmTask {
        self.task
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Dual objective value reached by the solver.
    pub fn dual_objective(&self) -> f64 {
        self.objective
    }

    /// Builds a model directly from its parts.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        width: usize,
        support_rows: &[Vec<f64>],
        coefficients: Vec<f64>,
        bias: f64,
        kernel: KernelSpec,
        capacity: f64,
        epsilon: f64,
        task: SvmTask,
    ) -> Result<Self> {
        if support_rows.len() != coefficients.len() {
            return Err(Error::DimensionMismatch(
                support_rows.len(),
                coefficients.len(),
            ));
        }
        let mut support = Vec::with_capacity(width * support_rows.len());
        for row in support_rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch(row.len(), width));
            }
            support.extend_from_slice(row);
        }
        Ok(Self {
            width,
            support,
            coefficients,
            bias,
            kernel,
            capacity,
            epsilon,
            task,
            objective: f64::NAN,
        })
    }

    /// Flat text form: a `# task` line, a header `w0 sigma C epsilon`, then one
    /// line per support row holding the coefficient followed by the row values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.task.name());
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.bias, self.kernel.sigma, self.capacity, self.epsilon
        );
        for (k, coef) in self.coefficients.iter().enumerate() {
            let _ = write!(out, "{coef}");
            for v in self.support_row(k) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse = |tok: &str| -> Result<f64> {
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {tok:?}: {e}")))
        };
        let mut task = SvmTask::Regression;
        let mut header = None;
        let mut rows = Vec::new();
        let mut coefficients = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(comment) = line.strip_prefix('#') {
                if comment.trim() == SvmTask::Classification.name() {
                    task = SvmTask::Classification;
                }
                continue;
            }
            let values = line
                .split_whitespace()
                .map(parse)
                .collect::<Result<Vec<f64>>>()?;
            if header.is_none() {
                if values.len() != 4 {
                    return Err(Error::Parse(format!(
                        "model header needs 4 values, found {}",
                        values.len()
                    )));
                }
                header = Some(values);
            } else {
                coefficients.push(values[0]);
                rows.push(values[1..].to_vec());
            }
        }
        let header = header.ok_or_else(|| Error::Parse("missing model header".into()))?;
        let width = rows.first().map_or(0, Vec::len);
        Self::from_parts(
            width,
            &rows,
            coefficients,
            header[0],
            KernelSpec::gaussian(header[1])?,
            header[2],
            header[3],
            task,
        )
    }
}

impl Readout for SvmModel {
    fn predict(&self, phi: &[f64]) -> Result<f64> {
        if self.support_len() > 0 && phi.len() != self.width {
            return Err(Error::DimensionMismatch(phi.len(), self.width));
        }
        let sum: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, w)| w * self.kernel.eval(phi, self.support_row(k)))
            .sum();
        Ok(self.bias + sum)
    }
}

fn collect_model(
    table: &ActivationTable,
    weights: Vec<f64>,
    bias: f64,
    objective: f64,
    params: &SvmParams,
    task: SvmTask,
) -> SvmModel {
    let width = table.width();
    let mut support = Vec::new();
    let mut coefficients = Vec::new();
    for (i, w) in weights.into_iter().enumerate() {
        if w != 0.0 {
            support.extend_from_slice(table.row(i));
            coefficients.push(w);
        }
    }
    SvmModel {
        width,
        support,
        coefficients,
        bias,
        kernel: params.kernel,
        capacity: params.capacity,
        epsilon: params.epsilon,
        task,
        objective,
    }
}

/// Soft-margin support vector classification; targets must be -1 or +1.
pub fn fit_svc(table: &ActivationTable, params: &SvmParams) -> Result<SvmModel> {
    let labels = table.targets();
    if let Some(&bad) = labels.iter().find(|&&d| d != 1.0 && d != -1.0) {
        return Err(Error::InvalidLabel(bad));
    }
    let positives = labels.iter().filter(|&&d| d > 0.0).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateLabels);
    }
    let mut cache = KernelCache::new(table, params.kernel);
    let problem = DualProblem::classification(labels, params.capacity);
    let solution = solve_dual(&mut cache, &problem, params.smo)?;
    let weights = solution
        .alpha
        .iter()
        .zip(labels)
        .map(|(a, y)| a * y)
        .collect();
    Ok(collect_model(
        table,
        weights,
        solution.bias,
        solution.objective,
        params,
        SvmTask::Classification,
    ))
}

/// Epsilon-insensitive support vector regression.
pub fn fit_svr(table: &ActivationTable, params: &SvmParams) -> Result<SvmModel> {
    let n = table.len();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let mut cache = KernelCache::new(table, params.kernel);
    let problem = DualProblem::regression(table.targets(), params.epsilon, params.capacity);
    let solution = solve_dual(&mut cache, &problem, params.smo)?;
    let weights = (0..n)
        .map(|i| solution.alpha[i] - solution.alpha[i + n])
        .collect();
    Ok(collect_model(
        table,
        weights,
        solution.bias,
        solution.objective,
        params,
        SvmTask::Regression,
    ))
}
