//! Random raised-cosine pulse trains and their uniform sampling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{fill_indexed, map_indexed, Execution};
use crate::{Error, Result};

/// Fraction added to the grid estimate of the peak amplitude.
pub const PEAK_MARGIN: f64 = 1e-3;
/// Grid density used by [`peak_amplitude`].
pub const PEAK_GRID_OVERSAMPLE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseTrainSpec {
    pub num_pulses: usize,
    pub beta: f64,
    /// Truncation span of each pulse, in symbols.
    pub span: usize,
    pub symbol_period: f64,
    pub amp_low: f64,
    pub amp_high: f64,
    pub seed: u64,
}

impl Default for PulseTrainSpec {
    fn default() -> Self {
        Self {
            num_pulses: 2000,
            beta: 1.0,
            span: 20,
            symbol_period: 1.0,
            amp_low: -0.5,
            amp_high: 1.0,
            seed: 0,
        }
    }
}

impl PulseTrainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_pulses == 0 {
            return Err(Error::config("num_pulses must be positive"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::config(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.span == 0 || !self.span.is_multiple_of(2) {
            return Err(Error::config(format!(
                "span must be even and positive, got {}",
                self.span
            )));
        }
        if !(self.symbol_period > 0.0) {
            return Err(Error::config("symbol_period must be positive"));
        }
        if !(self.amp_low < self.amp_high) {
            return Err(Error::config(format!(
                "amplitude interval [{}, {}] is empty",
                self.amp_low, self.amp_high
            )));
        }
        Ok(())
    }

    /// Bandwidth `ω_m = 2π(1 + β)/T` in rad/s.
    pub fn omega_m(&self) -> f64 {
        2.0 * PI * (1.0 + self.beta) / self.symbol_period
    }
}

/// Unit-peak raised-cosine pulse.
pub fn raised_cosine_value(t: f64, beta: f64, symbol_period: f64) -> f64 {
    let x = t / symbol_period;
    let den = 1.0 - (2.0 * beta * x).powi(2);
    if beta > 0.0 && den.abs() < 1e-10 {
        return PI / 4.0 * sinc(1.0 / (2.0 * beta));
    }
    sinc(x) * (PI * beta * x).cos() / den
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// `f(t) = Σ_{m=1}^{M} A_m p_rc(t − mT)`, each pulse truncated to `±span/2` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pub spec: PulseTrainSpec,
    pub amplitudes: Vec<f64>,
}

pub fn generate_pulse_train(spec: &PulseTrainSpec) -> Result<PulseTrain> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let amplitudes = (0..spec.num_pulses)
        .map(|_| rng.random_range(spec.amp_low..=spec.amp_high))
        .collect();
    Ok(PulseTrain {
        spec: spec.clone(),
        amplitudes,
    })
}

impl PulseTrain {
    /// Build a train from explicit amplitudes (`num_pulses` is overwritten).
    pub fn from_amplitudes(spec: &PulseTrainSpec, amplitudes: Vec<f64>) -> Result<Self> {
        let spec = PulseTrainSpec {
            num_pulses: amplitudes.len(),
            ..spec.clone()
        };
        spec.validate()?;
        Ok(Self { spec, amplitudes })
    }

    /// First instant with a nonzero pulse contribution.
    pub fn start_time(&self) -> f64 {
        (1.0 - self.spec.span as f64 / 2.0) * self.spec.symbol_period
    }

    pub fn end_time(&self) -> f64 {
        (self.amplitudes.len() as f64 + self.spec.span as f64 / 2.0) * self.spec.symbol_period
    }

    pub fn eval(&self, t: f64) -> f64 {
        let tp = self.spec.symbol_period;
        let half = self.spec.span as f64 / 2.0;
        let u = t / tp;
        let m_lo = ((u - half).ceil() as i64).max(1);
        let m_hi = ((u + half).floor() as i64).min(self.amplitudes.len() as i64);
        (m_lo..=m_hi)
            .map(|m| self.amplitudes[(m - 1) as usize] * raised_cosine_value(t - m as f64 * tp, self.spec.beta, tp))
            .sum()
    }

    /// Sample period for oversampling factor `of`: `T_s = 2π/(OF·ω_m)`.
    pub fn sample_period(&self, of: f64) -> f64 {
        self.spec.symbol_period / (of * (1.0 + self.spec.beta))
    }

    /// Sample count that covers the whole support at oversampling `of`.
    pub fn natural_len(&self, of: f64) -> usize {
        ((self.end_time() - self.start_time()) / self.sample_period(of)).floor() as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<f64>,
    pub sample_period_ts: f64,
    /// Time of `samples[0]`.
    pub t0: f64,
    pub rho: f64,
    pub omega_m: f64,
}

impl SampledSignal {
    pub fn oversampling_factor(&self) -> f64 {
        1.0 / self.rho
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Sample `train` at `n0` instants `t0 + n·T_s`, where `t0` is the start of
/// the train's support so that the record starts from rest.
pub fn sample_signal(train: &PulseTrain, of: f64, n0: usize) -> Result<SampledSignal> {
    sample_signal_with(Execution::default(), train, of, n0)
}

pub fn sample_signal_with(exec: Execution, train: &PulseTrain, of: f64, n0: usize) -> Result<SampledSignal> {
    if !(of >= 1.0) || !of.is_finite() {
        return Err(Error::invalid(format!(
            "oversampling factor must be at least 1, got {of}"
        )));
    }
    if n0 == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let ts = train.sample_period(of);
    let t0 = train.start_time();
    let mut samples = vec![0.0; n0];
    fill_indexed(exec, &mut samples, |n| train.eval(t0 + n as f64 * ts));
    Ok(SampledSignal {
        samples,
        sample_period_ts: ts,
        t0,
        rho: 1.0 / of,
        omega_m: train.spec.omega_m(),
    })
}

/// Maximum of `|f(t)|` on a grid of spacing `T_nyq/grid_oversample` over the
/// support, with `T_nyq = 2π/ω_m`.
pub fn estimate_inf_norm(train: &PulseTrain, grid_oversample: usize) -> Result<f64> {
    estimate_inf_norm_with(Execution::default(), train, grid_oversample)
}

pub fn estimate_inf_norm_with(exec: Execution, train: &PulseTrain, grid_oversample: usize) -> Result<f64> {
    if grid_oversample < 8 {
        return Err(Error::invalid(format!(
            "grid oversampling must be at least 8, got {grid_oversample}"
        )));
    }
    let h = train.sample_period(1.0) / grid_oversample as f64;
    let t0 = train.start_time();
    let count = ((train.end_time() - t0) / h).floor() as usize + 1;
    const CHUNK: usize = 8192;
    let chunks = count.div_ceil(CHUNK);
    let peaks = map_indexed(exec, chunks, |c| {
        (c * CHUNK..((c + 1) * CHUNK).min(count))
            .map(|i| train.eval(t0 + i as f64 * h).abs())
            .fold(0.0, f64::max)
    });
    Ok(peaks.into_iter().fold(0.0, f64::max))
}

/// Peak amplitude used to size the modulo threshold: the 64× grid estimate
/// inflated by 0.1%.
pub fn peak_amplitude(train: &PulseTrain) -> f64 {
    estimate_inf_norm(train, PEAK_GRID_OVERSAMPLE).expect("grid density is valid") * (1.0 + PEAK_MARGIN)
}
