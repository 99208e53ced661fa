//! Superimposed sine generation: `y(x) = sin(0.2 x) + sin(0.311 x)`.
//!
//! The network has no external input; its only channel is the backprojected
//! previous output. Steps 1..=100 are washout, 101..=400 train the readout,
//! 401..=700 validate, and 701..=1000 are predicted free-running.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::lstm::{InputMode, LstmNetwork};
use crate::readout::{ActivationTable, Readout};

pub const WASHOUT: RangeInclusive<usize> = 1..=100;
pub const TRAIN: RangeInclusive<usize> = 101..=400;
pub const VALIDATION: RangeInclusive<usize> = 401..=700;
pub const TEST: RangeInclusive<usize> = 701..=1000;

/// Network input channels for this task: the feedback channel only.
pub const SINE_INPUTS: usize = 1;

pub fn sine_value(x: f64) -> f64 {
    (0.2 * x).sin() + (0.311 * x).sin()
}

/// Series values at integer `x = 0..=length`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSeries {
    values: Vec<f64>,
}

impl SineSeries {
    pub fn length(&self) -> usize {
        self.values.len() - 1
    }

    pub fn at(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn segment(&self, range: RangeInclusive<usize>) -> &[f64] {
        &self.values[range]
    }

    /// Two columns `x y`, one line per point `x = 1..=length`.
    pub fn to_text(&self) -> String {
        (1..=self.length())
            .map(|x| format!("{x} {}\n", self.values[x]))
            .collect()
    }
}

pub fn generate_sine_series(length: usize) -> SineSeries {
    SineSeries {
        values: (0..=length).map(|x| sine_value(x as f64)).collect(),
    }
}

fn require_length(series: &SineSeries, last: usize) -> Result<()> {
    if series.length() < last {
        return Err(Error::InvalidConfig(format!(
            "series has {} points, protocol needs {last}",
            series.length()
        )));
    }
    Ok(())
}

/// Activation rows for steps `x = 1..=last` with the true previous value
/// clamped on the feedback channel. Row `x - 1` belongs to step `x`, whose
/// target is `y(x)`.
pub fn clamped_activations(
    net: &mut LstmNetwork,
    series: &SineSeries,
    last: usize,
) -> Result<Vec<Vec<f64>>> {
    require_length(series, last)?;
    if net.n_inputs() != SINE_INPUTS {
        return Err(Error::InputLength {
            expected: SINE_INPUTS,
            got: net.n_inputs(),
        });
    }
    net.reset();
    let inputs = vec![Vec::new(); last];
    net.run_sequence(
        &inputs,
        Some(series.segment(1..=last)),
        InputMode::Backprojected,
    )
}

/// Readout training table over the training segment.
pub fn training_table(rows: &[Vec<f64>], series: &SineSeries) -> Result<ActivationTable> {
    let (lo, hi) = (*TRAIN.start(), *TRAIN.end());
    ActivationTable::from_rows(&rows[lo - 1..hi], series.segment(TRAIN))
}

/// Summed squared error of `readout` over the rows of `range`.
pub fn segment_sse<R: Readout>(
    readout: &R,
    rows: &[Vec<f64>],
    series: &SineSeries,
    range: RangeInclusive<usize>,
) -> Result<f64> {
    range
        .map(|x| Ok((readout.predict(&rows[x - 1])? - series.at(x)).powi(2)))
        .sum()
}

/// Training and validation error of a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineScores {
    pub train_sse: f64,
    pub validation_sse: f64,
}

impl SineScores {
    pub fn total(&self) -> f64 {
        self.train_sse + self.validation_sse
    }
}

/// Runs steps 1..=700 clamped, fits a readout on 101..=400 and scores 101..=700.
pub fn sine_scores<R, F>(
    net: &mut LstmNetwork,
    series: &SineSeries,
    fit: F,
) -> Result<(R, SineScores)>
where
    R: Readout,
    F: FnOnce(&ActivationTable) -> Result<R>,
{
    let rows = clamped_activations(net, series, *VALIDATION.end())?;
    let readout = fit(&training_table(&rows, series)?)?;
    let scores = SineScores {
        train_sse: segment_sse(&readout, &rows, series, TRAIN)?,
        validation_sse: segment_sse(&readout, &rows, series, VALIDATION)?,
    };
    Ok((readout, scores))
}

/// Fitness: summed squared error over training plus validation; failures
/// map to `+inf`.
pub fn sine_fitness<R, F>(net: &mut LstmNetwork, series: &SineSeries, fit: F) -> f64
where
    R: Readout,
    F: FnOnce(&ActivationTable) -> Result<R>,
{
    match sine_scores(net, series, fit) {
        Ok((_, scores)) if scores.total().is_finite() => scores.total(),
        _ => f64::INFINITY,
    }
}

/// Predictions over the test segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SineTestRun {
    pub xs: Vec<usize>,
    pub targets: Vec<f64>,
    pub predictions: Vec<f64>,
}

impl SineTestRun {
    pub fn sse(&self) -> f64 {
        self.targets
            .iter()
            .zip(&self.predictions)
            .map(|(d, y)| (y - d).powi(2))
            .sum()
    }

    /// CSV with header `x,target,prediction`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,target,prediction\n");
        for ((x, d), y) in self.xs.iter().zip(&self.targets).zip(&self.predictions) {
            out.push_str(&format!("{x},{d},{y}\n"));
        }
        out
    }
}

/// Warms up on 1..=700 with the true values clamped, then predicts 701..=1000
/// feeding back the model's own outputs.
pub fn sine_test<R: Readout>(
    net: &mut LstmNetwork,
    readout: &R,
    series: &SineSeries,
) -> Result<SineTestRun> {
    require_length(series, *TEST.end())?;
    let warmup = *TEST.start() - 1;
    clamped_activations(net, series, warmup)?;
    let inputs = vec![Vec::new(); TEST.count()];
    let (_, predictions) = net.run_free(&inputs, series.at(warmup), |phi| readout.predict(phi))?;
    Ok(SineTestRun {
        xs: TEST.collect(),
        targets: series.segment(TEST).to_vec(),
        predictions,
    })
}

/// Like [`sine_test`] but with the true values clamped over the test segment too.
pub fn sine_test_teacher_forced<R: Readout>(
    net: &mut LstmNetwork,
    readout: &R,
    series: &SineSeries,
) -> Result<SineTestRun> {
    let rows = clamped_activations(net, series, *TEST.end())?;
    let predictions = TEST
        .map(|x| readout.predict(&rows[x - 1]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SineTestRun {
        xs: TEST.collect(),
        targets: series.segment(TEST).to_vec(),
        predictions,
    })
}
