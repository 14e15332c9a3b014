//! Modulo analog-to-digital conversion with 1-bit folding information.
//!
//! The crate simulates a modulo ADC (ideal folding, triangle dither, b-bit
//! uniform quantizer, per-sample fold flag) and recovers the input with a
//! sliding-window DFT unfolding scheme: each Tukey-windowed segment of the
//! first-differenced output is projected onto its out-of-band DFT bins, the
//! residue jumps at flagged samples are solved in least squares, corrected
//! for window attenuation across the overlap, rounded to the `2λ'` lattice,
//! integrated and subtracted before a final lowpass.
//!
//! Alongside the recovery it provides closed-form performance predictions,
//! a conventional-ADC baseline, a higher-order-difference baseline, and an
//! experiment harness that writes CSV.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adc;
pub mod baselines;
pub mod dsp;
mod error;
pub mod exec;
pub mod experiments;
pub mod signal;
pub mod theory;
pub mod unfold;

pub use error::{Error, Result};
pub use exec::Execution;

/// Power ratio in decibels.
pub fn db(power: f64) -> f64 {
    10.0 * power.log10()
}

/// Mean squared difference over the common prefix of two sequences.
pub fn mse(estimate: &[f64], truth: &[f64]) -> f64 {
    let n = estimate.len().min(truth.len());
    if n == 0 {
        return 0.0;
    }
    estimate[..n]
        .iter()
        .zip(&truth[..n])
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n as f64
}
