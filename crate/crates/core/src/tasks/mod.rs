//! Benchmark tasks: `a^n b^n c^n` next-symbol classification and
//! superimposed-sine generation.

pub mod csl;
pub mod sine;
