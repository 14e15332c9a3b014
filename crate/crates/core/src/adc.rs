//! Modulo ADC: folding, triangle dither, mid-rise quantizer and the 1-bit
//! fold flag.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::signal::SampledSignal;
use crate::{Error, Result};

/// Relative slack allowed on the quantizer range before declaring overload.
const RANGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig {
    pub b: u32,
    pub lambda_prime: f64,
    pub seed: u64,
    /// When false, dither and quantizer are bypassed and the output is the
    /// exact folded signal.
    pub quantize: bool,
}

impl AdcConfig {
    pub fn new(b: u32, lambda_prime: f64, seed: u64) -> Result<Self> {
        let c = Self {
            b,
            lambda_prime,
            seed,
            quantize: true,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn noiseless(lambda_prime: f64) -> Result<Self> {
        let c = Self {
            b: 16,
            lambda_prime,
            seed: 0,
            quantize: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=48).contains(&self.b) {
            return Err(Error::config(format!("bits must lie in 2..=48, got {}", self.b)));
        }
        if !(self.lambda_prime > 0.0 && self.lambda_prime.is_finite()) {
            return Err(Error::config(format!(
                "modulo threshold must be positive, got {}",
                self.lambda_prime
            )));
        }
        Ok(())
    }

    /// Quantizer range `λ = 2^b λ'/(2^b − 2)`.
    pub fn lambda(&self) -> f64 {
        quantizer_range(self.b, self.lambda_prime)
    }

    /// Bin width `2λ/2^b`.
    pub fn step(&self) -> f64 {
        2.0 * self.lambda() / levels(self.b)
    }
}

fn levels(b: u32) -> f64 {
    2f64.powi(b as i32)
}

/// `λ = 2^b λ'/(2^b − 2)`: the smallest range that a folded sample plus
/// triangle dither can never exceed.
pub fn quantizer_range(b: u32, lambda_prime: f64) -> f64 {
    let l = levels(b);
    l * lambda_prime / (l - 2.0)
}

/// Number of `2λ'` periods removed by folding:
/// `fold(x) = x − 2λ'·fold_count(x)`.
pub fn fold_count(x: f64, lambda_prime: f64) -> i64 {
    if (-lambda_prime..lambda_prime).contains(&x) {
        return 0;
    }
    let p = 2.0 * lambda_prime;
    let mut k = ((x + lambda_prime) / p).floor() as i64;
    let r = x - p * k as f64;
    if r >= lambda_prime {
        k += 1;
    } else if r < -lambda_prime {
        k -= 1;
    }
    k
}

/// `((x + λ') mod 2λ') − λ'`, always in `[−λ', λ')`.
pub fn fold(x: f64, lambda_prime: f64) -> f64 {
    let k = fold_count(x, lambda_prime);
    if k == 0 {
        x
    } else {
        x - 2.0 * lambda_prime * k as f64
    }
}

/// Triangular dither on `(−Δ, Δ]`, `Δ = 2λ/2^b`, drawn as the sum of two
/// uniforms on `(−Δ/2, Δ/2]`.
pub fn triangle_dither(count: usize, b: u32, lambda: f64, seed: u64) -> Vec<f64> {
    let d = 2.0 * lambda / levels(b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut half = || d / 2.0 - d * rng.random::<f64>();
    (0..count).map(|_| half() + half()).collect()
}

/// Mid-rise quantizer: `2^b` bins of width `2λ/2^b` on `[−λ, λ]`, reconstructed
/// at bin centers. Values outside the range are an overload error.
pub fn quantize_uniform(x: f64, b: u32, lambda: f64) -> Result<f64> {
    if !(x.abs() <= lambda * (1.0 + RANGE_TOL)) {
        return Err(Error::Overload {
            index: None,
            value: x,
            range: lambda,
        });
    }
    let l = levels(b);
    let d = 2.0 * lambda / l;
    let m = ((x + lambda) / d).floor().clamp(0.0, l - 1.0);
    Ok(-lambda + (m + 0.5) * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdcOutput {
    pub quantized: Vec<f64>,
    /// `c[n]`: set where the fold count differs from the previous sample.
    pub folding_bits: Vec<bool>,
    /// Ground-truth residue `z[n] = fold(f[n]) − f[n]`.
    pub residue_truth: Vec<f64>,
    /// `z[n] / (−2λ')`, the integer fold count behind `residue_truth`.
    pub fold_counts: Vec<i64>,
    pub config: AdcConfig,
}

impl AdcOutput {
    pub fn len(&self) -> usize {
        self.quantized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantized.is_empty()
    }

    pub fn fold_locations(&self) -> impl Iterator<Item = usize> + '_ {
        self.folding_bits
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
    }
}

/// Run the acquisition chain on a sampled signal.
pub fn acquire(signal: &SampledSignal, config: &AdcConfig) -> Result<AdcOutput> {
    config.validate()?;
    let lp = config.lambda_prime;
    let f = &signal.samples;
    if let Some(&f0) = f.first() {
        if f0.abs() > lp {
            return Err(Error::FirstSample {
                value: f0,
                lambda_prime: lp,
            });
        }
    }
    let n0 = f.len();
    let fold_counts: Vec<i64> = f.iter().map(|&x| fold_count(x, lp)).collect();
    let residue_truth: Vec<f64> = fold_counts.iter().map(|&k| -2.0 * lp * k as f64).collect();
    let mut prev = 0;
    let folding_bits = fold_counts
        .iter()
        .map(|&k| std::mem::replace(&mut prev, k) != k)
        .collect();

    let quantized = if config.quantize {
        let lambda = config.lambda();
        let dither = triangle_dither(n0, config.b, lambda, config.seed);
        f.iter()
            .zip(&residue_truth)
            .zip(&dither)
            .enumerate()
            .map(|(i, ((&x, &z), &d))| {
                quantize_uniform(x + z + d, config.b, lambda).map_err(|e| match e {
                    Error::Overload { value, range, .. } => Error::Overload {
                        index: Some(i),
                        value,
                        range,
                    },
                    e => e,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        f.iter().zip(&residue_truth).map(|(&x, &z)| x + z).collect()
    };
    Ok(AdcOutput {
        quantized,
        folding_bits,
        residue_truth,
        fold_counts,
        config: *config,
    })
}
