use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use modunfold::dsp::filter_zero_delay_with;
use modunfold::experiments::{run_mse_sweep, ExperimentConfig, Preset};
use modunfold::signal::{generate_pulse_train, sample_signal_with, PulseTrainSpec};
use modunfold::theory::estimate_m_with;
use modunfold::unfold::RecoveryConfig;
use modunfold::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn m_estimate(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_m");
    g.sample_size(10);
    for (name, exec) in MODES {
        for n in [64usize, 256] {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| estimate_m_with(exec, n, 8.0, PI / 32.0, n / 16, 2000, 1).unwrap())
            });
        }
    }
    g.finish();
}

fn sampling_and_filtering(c: &mut Criterion) {
    let train = generate_pulse_train(&PulseTrainSpec::default()).unwrap();
    let of = 16.0;
    let signal = sample_signal_with(Execution::Sequential, &train, of, train.natural_len(of)).unwrap();
    let lpf = RecoveryConfig::new(64, 0.5, PI / 32.0, 1.0, signal.rho)
        .lowpass()
        .unwrap();

    let mut g = c.benchmark_group("signal");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("sample", name), |b| {
            b.iter(|| sample_signal_with(exec, &train, of, train.natural_len(of)).unwrap())
        });
        g.bench_function(BenchmarkId::new("lowpass", name), |b| {
            b.iter(|| filter_zero_delay_with(exec, black_box(&signal.samples), &lpf).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::preset(Preset::Desk);
    cfg.seed = Some(1);
    cfg.signal.num_pulses = 500;
    cfg.mse_sweep.oversampling = vec![4.0, 8.0, 16.0, 32.0];

    let mut g = c.benchmark_group("mse_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = cfg.clone();
        cfg.execution = exec;
        g.bench_function(name, |b| b.iter(|| run_mse_sweep(&cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, m_estimate, sampling_and_filtering, sweep);
criterion_main!(benches);
