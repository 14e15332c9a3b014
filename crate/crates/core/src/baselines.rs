//! Reference recoveries: a conventional dithered ADC and higher-order
//! difference unfolding without fold flags.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::adc::{fold, quantize_uniform, quantizer_range, triangle_dither};
use crate::dsp::{filter_zero_delay_with, FirLowpass};
use crate::exec::Execution;
use crate::signal::SampledSignal;
use crate::unfold::{round_to_lattice, LpfConfig};
use crate::{Error, Result};

/// Range of the conventional quantizer, `2^b‖f‖∞/(2^b − 2)`: the same
/// headroom rule as the modulo ADC, applied to the full signal.
pub fn conventional_lambda(b: u32, f_inf: f64) -> f64 {
    quantizer_range(b, f_inf)
}

/// Lowpass for the conventional pipeline: transition band centred on the
/// signal band edge `ρπ`.
pub fn conventional_lowpass(rho: f64, lpf: &LpfConfig) -> Result<FirLowpass> {
    let tw = (PI / 16.0).min(rho * PI / 4.0);
    lpf.design_centered(rho * PI, tw)
}

/// Dither, quantize without folding, and lowpass.
pub fn conventional_adc(signal: &SampledSignal, b: u32, f_inf: f64, seed: u64) -> Result<Vec<f64>> {
    let lpf = conventional_lowpass(signal.rho, &LpfConfig::default())?;
    conventional_adc_with(Execution::default(), signal, b, f_inf, seed, &lpf)
}

pub fn conventional_adc_with(
    exec: Execution,
    signal: &SampledSignal,
    b: u32,
    f_inf: f64,
    seed: u64,
    lpf: &FirLowpass,
) -> Result<Vec<f64>> {
    if !(2..=48).contains(&b) {
        return Err(Error::config(format!("bits must lie in 2..=48, got {b}")));
    }
    if !(f_inf > 0.0) {
        return Err(Error::config("peak amplitude must be positive"));
    }
    let lambda = conventional_lambda(b, f_inf);
    let dither = triangle_dither(signal.len(), b, lambda, seed);
    let q = signal
        .samples
        .iter()
        .zip(&dither)
        .enumerate()
        .map(|(i, (&x, &d))| {
            quantize_uniform(x + d, b, lambda).map_err(|_| Error::Overload {
                index: Some(i),
                value: x + d,
                range: lambda,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    filter_zero_delay_with(exec, &q, lpf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HodConfig {
    pub order: usize,
    pub lambda_prime: f64,
}

/// Differences with a zero prefix: `y[n] − y[n−1]`, `y[−1] = 0`.
fn difference(x: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    x.iter().map(|&v| v - std::mem::replace(&mut prev, v)).collect()
}

fn cumulative_sum(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect()
}

/// Order-K unfolding from modulo samples alone: fold the K-th difference back
/// into `[−λ', λ')`, then integrate the implied residue K times, rounding to
/// the `2λ'` lattice after each pass. The result is anchored so that
/// `f̂[0]` equals the first modulo sample. No lowpass is applied.
pub fn hod_recover(quantized_modulo: &[f64], lambda_prime: f64, cfg: &HodConfig) -> Result<Vec<f64>> {
    if cfg.order == 0 {
        return Err(Error::config("difference order must be at least 1"));
    }
    if !(lambda_prime > 0.0) {
        return Err(Error::config("modulo threshold must be positive"));
    }
    if quantized_modulo.is_empty() {
        return Ok(Vec::new());
    }
    let mut dk = quantized_modulo.to_vec();
    for _ in 0..cfg.order {
        dk = difference(&dk);
    }
    // Residue of the K-th difference, i.e. an estimate of −Δ^K z.
    let mut s: Vec<f64> = dk.iter().map(|&v| fold(v, lambda_prime) - v).collect();
    for _ in 0..cfg.order {
        s = round_to_lattice(&cumulative_sum(&s), lambda_prime);
    }
    let s0 = s[0];
    Ok(quantized_modulo.iter().zip(&s).map(|(&q, &r)| q + (r - s0)).collect())
}
