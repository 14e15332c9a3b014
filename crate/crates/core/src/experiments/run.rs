use std::time::Instant;

use super::config::{ExperimentConfig, ExperimentKind, RecoverySection};
use super::csv::{MGridRow, ResultRow, RowStatus};
use crate::adc::{acquire, AdcConfig};
use crate::baselines::{conventional_adc_with, conventional_lowpass, hod_recover, HodConfig};
use crate::dsp::filter_zero_delay_with;
use crate::exec::{derive_seed, map_indexed, Execution};
use crate::signal::{generate_pulse_train, peak_amplitude, sample_signal_with, PulseTrain};
use crate::theory::{
    b_sufficient, estimate_m_with, lambda_prime_required, mse_conventional, mse_guarantee, spectral_leakage_bins,
};
use crate::unfold::{LpfConfig, RecoveryConfig, Unfolder};
use crate::{db, mse, Error, Result};

/// A pulse train and its peak amplitude, shared by every grid point.
#[derive(Debug, Clone)]
pub struct PreparedSignal {
    pub train: PulseTrain,
    /// Grid estimate of `‖f‖∞` with the safety margin applied.
    pub f_inf: f64,
}

impl PreparedSignal {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let train = generate_pulse_train(&cfg.signal.spec(derive_seed(seed, 0)))?;
        let f_inf = peak_amplitude(&train);
        Ok(Self { train, f_inf })
    }
}

/// Build the shared signal for a run.
pub fn prepare_point(cfg: &ExperimentConfig, seed: u64) -> Result<PreparedSignal> {
    PreparedSignal::new(cfg, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimulationOptions {
    pub conventional: bool,
    /// Difference order of the HoD baseline, if it should run.
    pub hod_order: Option<usize>,
    /// Bypass dither and quantization.
    pub noiseless: bool,
    pub exec: Execution,
}

/// Measurements at one `(OF, b, δ_SL)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub k_sl: usize,
    pub lambda_prime: f64,
    pub mse_simulated: f64,
    pub mse_theory: f64,
    pub mse_conventional: Option<f64>,
    pub mse_conventional_theory: f64,
    pub mse_hod: Option<f64>,
    pub residue_errors: usize,
    pub samples_used: usize,
    pub max_folds: usize,
}

fn lpf_config(r: &RecoverySection) -> LpfConfig {
    LpfConfig {
        transition: r.lpf_transition,
        length: r.lpf_length,
    }
}

/// Sample, acquire and recover at one operating point. `seed` is the
/// point's own seed; dither streams are derived from it.
#[allow(clippy::too_many_arguments)]
pub fn simulate_point(
    prep: &PreparedSignal,
    recovery: &RecoverySection,
    of: f64,
    b: u32,
    delta_sl: f64,
    seed: u64,
    opts: &SimulationOptions,
) -> Result<PointOutcome> {
    let n = recovery.n;
    let k_sl = spectral_leakage_bins(delta_sl, n);
    let lambda_prime = lambda_prime_required(prep.f_inf, of, k_sl, n)?;
    let mse_theory = mse_guarantee(prep.f_inf, of, b, k_sl, delta_sl, n)?;
    let signal = sample_signal_with(opts.exec, &prep.train, of, prep.train.natural_len(of))?;
    let adc_cfg = if opts.noiseless {
        AdcConfig::noiseless(lambda_prime)?
    } else {
        AdcConfig::new(b, lambda_prime, derive_seed(seed, 1))?
    };
    let adc = acquire(&signal, &adc_cfg)?;
    let mut rc = RecoveryConfig::new(n, recovery.alpha, delta_sl, lambda_prime, signal.rho);
    rc.lpf = lpf_config(recovery);
    let unfolder = Unfolder::new(&rc)?.with_execution(opts.exec);
    let rec = unfolder.unfold(&adc, &signal)?;
    let samples_used = signal.len();

    let mse_conv = if opts.conventional {
        let lpf = conventional_lowpass(signal.rho, &rc.lpf)?;
        let est = conventional_adc_with(opts.exec, &signal, b, prep.f_inf, derive_seed(seed, 2), &lpf)?;
        Some(mse(&est, &signal.samples))
    } else {
        None
    };
    let mse_hod = match opts.hod_order {
        Some(order) => {
            let raw = hod_recover(&adc.quantized, lambda_prime, &HodConfig { order, lambda_prime })?;
            let est = filter_zero_delay_with(opts.exec, &raw, unfolder.lowpass())?;
            Some(mse(&est, &signal.samples))
        }
        None => None,
    };
    Ok(PointOutcome {
        k_sl,
        lambda_prime,
        mse_simulated: mse(&rec.estimate, &signal.samples),
        mse_theory,
        mse_conventional: mse_conv,
        mse_conventional_theory: mse_conventional(prep.f_inf, of, b),
        mse_hod,
        residue_errors: rec.residue_errors(&adc),
        samples_used,
        max_folds: rec.max_folds,
    })
}

fn require_seed(cfg: &ExperimentConfig) -> Result<u64> {
    cfg.seed
        .ok_or_else(|| Error::config("a seed is required (config \"seed\" or --seed)"))
}

/// Classify a point error: configuration problems abort the run, the rest
/// become row annotations.
fn annotate(row: &mut ResultRow, e: Error) -> Result<()> {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => Err(e),
        Error::Infeasible(_) => {
            row.status = RowStatus::Skipped;
            row.reason = e.to_string();
            Ok(())
        }
        e => {
            row.status = RowStatus::Failed;
            row.reason = e.to_string();
            Ok(())
        }
    }
}

fn fill_row(row: &mut ResultRow, o: &PointOutcome) {
    row.k_sl = Some(o.k_sl);
    row.lambda_prime = Some(o.lambda_prime);
    row.mse_simulated_db = Some(db(o.mse_simulated));
    row.mse_theory_db = Some(db(o.mse_theory));
    row.mse_conventional_db = o.mse_conventional.map(db);
    row.mse_conventional_theory_db = Some(db(o.mse_conventional_theory));
    row.mse_hod_db = o.mse_hod.map(db);
    row.residue_errors = Some(o.residue_errors);
    row.samples_used = Some(o.samples_used);
}

fn run_points(
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
    points: &[(f64, u32, f64)],
    opts: SimulationOptions,
) -> Result<Vec<ResultRow>> {
    let seed = require_seed(cfg)?;
    cfg.validate(kind)?;
    let prep = PreparedSignal::new(cfg, seed)?;
    let rows = map_indexed(cfg.execution, points.len(), |i| {
        let (of, b, delta) = points[i];
        let pt_seed = derive_seed(seed, 1 + i as u64);
        let mut row = ResultRow::new(kind, of, b, delta, seed);
        let t = Instant::now();
        match simulate_point(&prep, &cfg.recovery, of, b, delta, pt_seed, &opts) {
            Ok(o) => fill_row(&mut row, &o),
            Err(e) => {
                row.k_sl = Some(spectral_leakage_bins(delta, cfg.recovery.n));
                annotate(&mut row, e)?;
            }
        }
        if cfg.record_timings {
            row.wall_time_ms = Some(t.elapsed().as_secs_f64() * 1e3);
        }
        Ok(row)
    });
    rows.into_iter().collect()
}

/// Simulated versus predicted MSE over the `(δ_SL, b, OF)` grid.
pub fn run_mse_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let s = &cfg.mse_sweep;
    let mut points = Vec::new();
    for &d in &s.delta_sl {
        for &b in &s.bits {
            for &of in &s.oversampling {
                points.push((of, b, d));
            }
        }
    }
    let opts = SimulationOptions {
        conventional: s.conventional,
        exec: cfg.execution,
        ..Default::default()
    };
    run_points(cfg, ExperimentKind::MseSweep, &points, opts)
}

/// Sliding-DFT and HoD recovery on the same modulo samples over `(b, OF)`.
pub fn run_compare_hod(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let s = &cfg.compare_hod;
    let mut points = Vec::new();
    for &b in &s.bits {
        for &of in &s.oversampling {
            points.push((of, b, s.delta_sl));
        }
    }
    let opts = SimulationOptions {
        hod_order: Some(s.order),
        exec: cfg.execution,
        ..Default::default()
    };
    run_points(cfg, ExperimentKind::CompareHod, &points, opts)
}

/// Predictions only, over the `mse_sweep` grid.
pub fn run_theory_only(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let seed = require_seed(cfg)?;
    cfg.validate(ExperimentKind::TheoryOnly)?;
    let prep = PreparedSignal::new(cfg, seed)?;
    let n = cfg.recovery.n;
    let s = &cfg.mse_sweep;
    let mut rows = Vec::new();
    for &d in &s.delta_sl {
        for &b in &s.bits {
            for &of in &s.oversampling {
                let mut row = ResultRow::new(ExperimentKind::TheoryOnly, of, b, d, seed);
                let k_sl = spectral_leakage_bins(d, n);
                row.k_sl = Some(k_sl);
                row.mse_conventional_theory_db = Some(db(mse_conventional(prep.f_inf, of, b)));
                let pred = lambda_prime_required(prep.f_inf, of, k_sl, n)
                    .and_then(|lp| Ok((lp, mse_guarantee(prep.f_inf, of, b, k_sl, d, n)?)));
                match pred {
                    Ok((lp, m)) => {
                        row.lambda_prime = Some(lp);
                        row.mse_theory_db = Some(db(m));
                    }
                    Err(e) => annotate(&mut row, e)?,
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// `M̃` and `log₂(1 + 0.75·M̃)` over `(N, OF, |S|)`.
pub fn run_m_grid(cfg: &ExperimentConfig) -> Result<Vec<MGridRow>> {
    let seed = require_seed(cfg)?;
    cfg.validate(ExperimentKind::MGrid)?;
    let g = &cfg.m_grid;
    let mut rows = Vec::new();
    let mut idx = 0u64;
    for &n in &g.n {
        for &of in &g.oversampling {
            for &d in &g.s_divisors {
                let s_size = n / d;
                let cell_seed = derive_seed(seed, idx);
                idx += 1;
                let t = Instant::now();
                let mut row = MGridRow {
                    n,
                    of,
                    s_size,
                    delta_sl: g.delta_sl,
                    trials: g.trials,
                    m_tilde: None,
                    b_extra: None,
                    wall_time_ms: None,
                    seed,
                    status: RowStatus::Ok,
                    reason: String::new(),
                };
                match estimate_m_with(cfg.execution, n, of, g.delta_sl, s_size, g.trials, cell_seed) {
                    Ok(m) => {
                        row.m_tilde = Some(m);
                        row.b_extra = Some(b_sufficient(m) - 3.0);
                    }
                    Err(e @ (Error::Infeasible(_) | Error::Config(_))) => {
                        row.status = RowStatus::Skipped;
                        row.reason = e.to_string();
                    }
                    Err(e) => return Err(e),
                }
                if cfg.record_timings {
                    row.wall_time_ms = Some(t.elapsed().as_secs_f64() * 1e3);
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
