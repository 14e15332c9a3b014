//! Sliding-DFT unfolding.
//!
//! Each Tukey-windowed segment of the first-differenced modulo samples is
//! transformed, and its out-of-band bins (where only residue jumps and noise
//! live) are fitted in least squares with unknowns at the flagged samples.
//! Overlapping window edges are summed back to unit gain, the result is
//! rounded to the `2λ'` lattice, integrated, subtracted and lowpassed.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adc::AdcOutput;
use crate::dsp::{
    build_oob_system, design_lowpass, filter_zero_delay_with, least_squares_apply, select_columns, tukey_window,
    DftPlan, FirLowpass, OobSystem, TukeyWindow,
};
use crate::exec::Execution;
use crate::signal::SampledSignal;
use crate::{Error, Result};

/// Shortest recovery lowpass used unless the caller overrides it.
pub const MIN_LPF_LENGTH: usize = 257;

/// Lowpass parameters; `None` selects the automatic choice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpfConfig {
    pub transition: Option<f64>,
    pub length: Option<usize>,
}

impl LpfConfig {
    /// Lowpass whose transition band is centred on `edge`.
    pub fn design_centered(&self, edge: f64, default_transition: f64) -> Result<FirLowpass> {
        let tw = self.transition.unwrap_or(default_transition);
        let pass = edge - tw / 2.0;
        if !(pass > 0.0) {
            return Err(Error::config(format!(
                "lowpass transition {tw} is too wide for band edge {edge}"
            )));
        }
        match self.length {
            Some(l) => design_lowpass(pass, tw, Some(l)),
            None => {
                let f = design_lowpass(pass, tw, None)?;
                if f.length < MIN_LPF_LENGTH {
                    design_lowpass(pass, tw, Some(MIN_LPF_LENGTH))
                } else {
                    Ok(f)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub n: usize,
    pub alpha: f64,
    pub delta_sl: f64,
    pub lambda_prime: f64,
    pub rho: f64,
    pub lpf: LpfConfig,
}

impl RecoveryConfig {
    pub fn new(n: usize, alpha: f64, delta_sl: f64, lambda_prime: f64, rho: f64) -> Self {
        Self {
            n,
            alpha,
            delta_sl,
            lambda_prime,
            rho,
            lpf: LpfConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::dsp::tukey_window(self.n, self.alpha)?;
        if !(self.lambda_prime > 0.0) {
            return Err(Error::config("modulo threshold must be positive"));
        }
        if !(self.delta_sl >= 0.0 && self.delta_sl < PI * (1.0 - self.rho)) {
            return Err(Error::config(format!(
                "delta_sl = {} leaves no out-of-band region at rho = {}",
                self.delta_sl, self.rho
            )));
        }
        Ok(())
    }

    /// Recovery lowpass: its transition band is centred on `ρπ + δ_SL`, so
    /// its noise bandwidth is close to `ρ + δ_SL/π`.
    pub fn lowpass(&self) -> Result<FirLowpass> {
        let edge = self.rho * PI + self.delta_sl;
        let tw = (PI / 32.0).min(self.delta_sl.max(self.rho * PI / 4.0));
        self.lpf.design_centered(edge, tw)
    }
}

/// Cross-segment state.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCarry {
    /// Modulo sample just before the current segment.
    pub prev_last_quantized: f64,
    /// Last `αN/2` samples of the previous windowed pre-estimate.
    pub prev_windowed_tail: Vec<f64>,
    /// Committed residue at the segment boundary, in units of `2λ'`.
    pub running_count: i64,
}

impl SegmentCarry {
    pub fn new(overlap: usize) -> Self {
        Self {
            prev_last_quantized: 0.0,
            prev_windowed_tail: vec![0.0; overlap],
            running_count: 0,
        }
    }

    pub fn running_residue(&self, lambda_prime: f64) -> f64 {
        -2.0 * lambda_prime * self.running_count as f64
    }
}

/// Segment starts `0, hop, 2·hop, …` below `n0`, with `hop = N(1 − α/2)`.
/// Segments reaching past `n0` are zero-padded by the caller.
pub fn segment_starts(n0: usize, n: usize, alpha: f64) -> Result<Vec<usize>> {
    crate::dsp::tukey_window(n, alpha)?;
    if n > n0 {
        return Err(Error::invalid(format!("segment length {n} exceeds signal length {n0}")));
    }
    let hop = n - ((alpha * n as f64).round() as usize) / 2;
    Ok((0..n0).step_by(hop).collect())
}

/// `w[n]·(x[n] − x[n−1])` with `x[−1] = prev_last`.
pub fn windowed_first_difference(segment: &[f64], prev_last: f64, window: &TukeyWindow) -> Vec<f64> {
    assert_eq!(segment.len(), window.n, "segment length must match window length");
    let mut prev = prev_last;
    segment
        .iter()
        .zip(&window.coefficients)
        .map(|(&x, &w)| w * (x - std::mem::replace(&mut prev, x)))
        .collect()
}

/// Solver state reused across segments.
#[derive(Debug, Clone)]
struct OobSolver {
    sys: OobSystem,
    plan: DftPlan,
}

impl OobSolver {
    fn new(sys: OobSystem) -> Result<Self> {
        let plan = DftPlan::new(sys.n)?;
        Ok(Self { sys, plan })
    }

    fn pre_estimate(&self, diffed: &[f64], s: &[usize]) -> Result<Vec<f64>> {
        let n = self.sys.n;
        if diffed.len() != n {
            return Err(Error::invalid(format!(
                "differenced segment has {} samples, expected {n}",
                diffed.len()
            )));
        }
        let mut out = vec![0.0; n];
        if s.is_empty() {
            return Ok(out);
        }
        if s.len() > self.sys.k() {
            return Err(Error::OversamplingInsufficient {
                folds: s.len(),
                bins: self.sys.k(),
            });
        }
        let a = select_columns(&self.sys, s)?;
        let spec = self.plan.forward(diffed);
        let rhs: DVector<Complex64> =
            DVector::from_iterator(self.sys.k(), self.sys.oob_bins.iter().map(|&k| spec.bins[k]));
        let ls = least_squares_apply(&a, &rhs)?;
        if !ls.full_column_rank() {
            return Err(Error::RankDeficient {
                rank: ls.rank,
                columns: s.len(),
                sigma_min: ls.sigma_min,
            });
        }
        for (&i, v) in s.iter().zip(ls.solution.iter()) {
            out[i] = v.re;
        }
        Ok(out)
    }
}

/// Windowed residue-jump estimate on `s` (zero elsewhere).
pub fn residue_pre_estimate(diffed: &[f64], s: &[usize], sys: &OobSystem) -> Result<Vec<f64>> {
    OobSolver::new(sys.clone())?.pre_estimate(diffed, s)
}

/// Undo the window taper on the first `αN/2` samples using the previous
/// segment's tail, returning the corrected first `N(1 − α/2)` samples and
/// storing this segment's tail in `carry`.
pub fn scaling_correction(current: &[f64], carry: &mut SegmentCarry, alpha: f64) -> Result<Vec<f64>> {
    let n = current.len();
    let ov = ((alpha * n as f64).round() as usize) / 2;
    if carry.prev_windowed_tail.len() != ov {
        return Err(Error::invalid(format!(
            "carried tail has {} samples, expected {ov}",
            carry.prev_windowed_tail.len()
        )));
    }
    let hop = n - ov;
    let mut out = current[..hop].to_vec();
    for (o, t) in out.iter_mut().zip(&carry.prev_windowed_tail) {
        *o += t;
    }
    carry.prev_windowed_tail.copy_from_slice(&current[hop..]);
    Ok(out)
}

/// Nearest multiple of `2λ'`, ties away from zero.
pub fn round_to_lattice(x: &[f64], lambda_prime: f64) -> Vec<f64> {
    let p = 2.0 * lambda_prime;
    x.iter().map(|&v| p * (v / p).round()).collect()
}

fn lattice_count(v: f64, lambda_prime: f64) -> i64 {
    (v / (2.0 * lambda_prime)).round() as i64
}

/// Output of [`unfold`].
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    /// Lowpassed signal estimate `f̂[n]`.
    pub estimate: Vec<f64>,
    /// Residue estimate `ẑ[n]`.
    pub residue: Vec<f64>,
    /// `ẑ[n] / (−2λ')`, comparable with `AdcOutput::fold_counts`.
    pub residue_counts: Vec<i64>,
    pub segments: usize,
    /// Segments that contained at least one fold flag.
    pub active_segments: usize,
    /// Largest number of flags in one segment.
    pub max_folds: usize,
}

impl Recovery {
    /// Samples whose recovered residue jump differs from the true one.
    pub fn residue_errors(&self, adc: &AdcOutput) -> usize {
        let mut prev = (0, 0);
        self.residue_counts
            .iter()
            .zip(&adc.fold_counts)
            .filter(|&(&a, &b)| {
                let p = std::mem::replace(&mut prev, (a, b));
                a - p.0 != b - p.1
            })
            .count()
    }
}

/// Precomputed window, out-of-band system and lowpass for one configuration.
#[derive(Debug, Clone)]
pub struct Unfolder {
    cfg: RecoveryConfig,
    window: TukeyWindow,
    solver: OobSolver,
    lpf: FirLowpass,
    exec: Execution,
}

impl Unfolder {
    pub fn new(cfg: &RecoveryConfig) -> Result<Self> {
        cfg.validate()?;
        let window = tukey_window(cfg.n, cfg.alpha)?;
        let solver = OobSolver::new(build_oob_system(cfg.n, cfg.rho, cfg.delta_sl)?)?;
        let lpf = cfg.lowpass()?;
        Ok(Self {
            cfg: cfg.clone(),
            window,
            solver,
            lpf,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn lowpass(&self) -> &FirLowpass {
        &self.lpf
    }

    pub fn oob_system(&self) -> &OobSystem {
        &self.solver.sys
    }

    /// Residue estimate only, before lowpass filtering.
    pub fn residue(&self, quantized: &[f64], flags: &[bool]) -> Result<Recovery> {
        let n0 = quantized.len();
        if flags.len() != n0 {
            return Err(Error::invalid("fold flags and samples differ in length"));
        }
        let n = self.cfg.n;
        let lp = self.cfg.lambda_prime;
        let hop = self.window.hop();
        let starts = segment_starts(n0, n, self.cfg.alpha)?;
        let mut carry = SegmentCarry::new(self.window.overlap());
        let mut counts = vec![0i64; n0];
        let mut active = 0;
        let mut max_folds = 0;
        let mut seg = vec![0.0; n];
        let mut s_idx = Vec::with_capacity(n);

        // Commit `values` (windowed-gain-corrected jumps) at `start..`.
        let mut commit = |carry: &mut SegmentCarry, start: usize, values: &[f64]| {
            for (j, &v) in values.iter().enumerate() {
                let i = start + j;
                if i >= n0 {
                    break;
                }
                carry.running_count -= lattice_count(v, lp);
                counts[i] = carry.running_count;
            }
        };

        for (si, &start) in starts.iter().enumerate() {
            s_idx.clear();
            for (j, slot) in seg.iter_mut().enumerate() {
                let i = start + j;
                *slot = if i < n0 { quantized[i] } else { 0.0 };
                if i < n0 && flags[i] {
                    s_idx.push(j);
                }
            }
            carry.prev_last_quantized = if start == 0 { 0.0 } else { quantized[start - 1] };
            let current = if s_idx.is_empty() {
                vec![0.0; n]
            } else {
                active += 1;
                max_folds = max_folds.max(s_idx.len());
                let diffed = windowed_first_difference(&seg, carry.prev_last_quantized, &self.window);
                self.solver
                    .pre_estimate(&diffed, &s_idx)
                    .map_err(|e| e.in_segment(si))?
            };
            let corrected = scaling_correction(&current, &mut carry, self.cfg.alpha)?;
            commit(&mut carry, start, &corrected);
            if si + 1 == starts.len() {
                let tail = carry.prev_windowed_tail.clone();
                commit(&mut carry, start + hop, &tail);
            }
        }
        let residue = counts.iter().map(|&k| -2.0 * lp * k as f64).collect();
        Ok(Recovery {
            estimate: Vec::new(),
            residue,
            residue_counts: counts,
            segments: starts.len(),
            active_segments: active,
            max_folds,
        })
    }

    pub fn unfold(&self, adc: &AdcOutput, signal_meta: &SampledSignal) -> Result<Recovery> {
        let lp = self.cfg.lambda_prime;
        if (adc.config.lambda_prime - lp).abs() > 1e-12 * lp {
            return Err(Error::config(format!(
                "recovery threshold {lp} differs from the ADC threshold {}",
                adc.config.lambda_prime
            )));
        }
        if (signal_meta.rho - self.cfg.rho).abs() > 1e-12 {
            return Err(Error::config(format!(
                "recovery rho {} differs from the signal's {}",
                self.cfg.rho, signal_meta.rho
            )));
        }
        let mut rec = self.residue(&adc.quantized, &adc.folding_bits)?;
        let unfolded: Vec<f64> = adc.quantized.iter().zip(&rec.residue).map(|(q, z)| q - z).collect();
        rec.estimate = filter_zero_delay_with(self.exec, &unfolded, &self.lpf)?;
        Ok(rec)
    }
}

/// Recover `f̂[n]` from modulo samples and fold flags.
pub fn unfold(adc: &AdcOutput, signal_meta: &SampledSignal, cfg: &RecoveryConfig) -> Result<Recovery> {
    Unfolder::new(cfg)?.unfold(adc, signal_meta)
}
