//! Recurrent feature extractors evolved with Enforced SubPopulations, paired
//! with output layers fitted analytically for every candidate network.
//!
//! A candidate is a set of LSTM memory-cell chromosomes. It is decoded into a
//! network, run over training sequences to collect activation rows, and given
//! an output layer fitted in closed form: a Gaussian-kernel support vector
//! machine (classification or epsilon-regression, solved by SMO) or a
//! pseudoinverse least-squares map. The fitted system's error on training and
//! validation data is the candidate's fitness.

pub mod error;
pub mod harness;
pub mod lstm;
pub mod neuroevolution;
pub mod oracle;
pub mod readout;
pub mod selftest;
pub mod tasks;

pub use error::{Error, Result};
