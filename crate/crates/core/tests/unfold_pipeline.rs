use std::f64::consts::PI;

use modunfold::adc::{acquire, AdcConfig};
use modunfold::dsp::{
    build_oob_system, dft_normalized, least_squares_apply, select_columns, tukey_window, Complex64, DVector,
};
use modunfold::signal::{generate_pulse_train, peak_amplitude, sample_signal, PulseTrainSpec, SampledSignal};
use modunfold::theory::{lambda_prime_required, spectral_leakage_bins};
use modunfold::unfold::{residue_pre_estimate, RecoveryConfig, Unfolder};
use modunfold::{mse, Error, Execution};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 64;
const ALPHA: f64 = 0.5;

struct Setup {
    signal: SampledSignal,
    lambda_prime: f64,
}

fn setup(seed: u64, pulses: usize, of: f64, delta: f64) -> Setup {
    let train = generate_pulse_train(&PulseTrainSpec {
        num_pulses: pulses,
        seed,
        ..PulseTrainSpec::default()
    })
    .unwrap();
    let k = spectral_leakage_bins(delta, N);
    let lambda_prime = lambda_prime_required(peak_amplitude(&train), of, k, N).unwrap();
    let signal = sample_signal(&train, of, train.natural_len(of)).unwrap();
    Setup { signal, lambda_prime }
}

fn unfolder(s: &Setup, delta: f64) -> Unfolder {
    Unfolder::new(&RecoveryConfig::new(N, ALPHA, delta, s.lambda_prime, s.signal.rho)).unwrap()
}

fn in_band_noise(b: u32, lambda_prime: f64, rho: f64, delta: f64) -> f64 {
    let lambda = AdcConfig::new(b, lambda_prime, 0).unwrap().lambda();
    lambda * lambda / 4f64.powi(b as i32) * (rho + delta / PI)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn noiseless_residue_is_exact(
        seed in any::<u64>(),
        of in prop::sample::select(vec![4.0, 5.0, 6.0, 8.0, 12.0]),
        delta in prop::sample::select(vec![PI / 32.0, PI / 16.0]),
    ) {
        let s = setup(seed, 200, of, delta);
        let adc = acquire(&s.signal, &AdcConfig::noiseless(s.lambda_prime).unwrap()).unwrap();
        let rec = unfolder(&s, delta).unfold(&adc, &s.signal).unwrap();
        prop_assert_eq!(rec.residue_errors(&adc), 0);
        prop_assert_eq!(&rec.residue_counts, &adc.fold_counts);
        prop_assert!(rec.max_folds > 0);
    }

    #[test]
    fn residue_stays_on_lattice(seed in any::<u64>(), b in 3u32..9, of in 4.0f64..20.0) {
        let delta = PI / 32.0;
        let s = setup(seed, 100, of, delta);
        let adc = acquire(&s.signal, &AdcConfig::new(b, s.lambda_prime, seed ^ 7).unwrap()).unwrap();
        let rec = unfolder(&s, delta).residue(&adc.quantized, &adc.folding_bits).unwrap();
        let step = 2.0 * s.lambda_prime;
        for (z, k) in rec.residue.iter().zip(&rec.residue_counts) {
            let q = z / step;
            prop_assert!((q - q.round()).abs() < 1e-9);
            prop_assert_eq!(q.round() as i64, -k);
        }
    }
}

#[test]
fn no_folds_high_resolution_floor() {
    let delta = PI / 32.0;
    let mut s = setup(3, 400, 8.0, delta);
    s.lambda_prime = 1.5 * s.signal.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let adc = acquire(&s.signal, &AdcConfig::new(16, s.lambda_prime, 11).unwrap()).unwrap();
    assert!(adc.folding_bits.iter().all(|&c| !c));
    let rec = unfolder(&s, delta).unfold(&adc, &s.signal).unwrap();
    assert_eq!(rec.active_segments, 0);
    let e = mse(&rec.estimate, &s.signal.samples);
    assert!(10.0 * e.log10() < -80.0, "MSE {} dB", 10.0 * e.log10());
}

#[test]
fn tiny_signal_hits_quantization_floor() {
    let delta = PI / 32.0;
    let train = generate_pulse_train(&PulseTrainSpec {
        amp_low: -5e-5,
        amp_high: 1e-4,
        seed: 5,
        ..PulseTrainSpec::default()
    })
    .unwrap();
    let signal = sample_signal(&train, 8.0, train.natural_len(8.0)).unwrap();
    let s = Setup {
        signal,
        lambda_prime: 1.0,
    };
    let adc = acquire(&s.signal, &AdcConfig::new(16, 1.0, 21).unwrap()).unwrap();
    let rec = unfolder(&s, delta).unfold(&adc, &s.signal).unwrap();
    let ratio = mse(&rec.estimate, &s.signal.samples) / in_band_noise(16, 1.0, s.signal.rho, delta);
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn mse_matches_in_band_noise_when_residues_are_exact() {
    let delta = PI / 32.0;
    for (b, of, seed) in [(4, 8.0, 1), (4, 16.0, 2), (5, 40.0, 3), (6, 12.0, 4)] {
        let s = setup(seed, 2000, of, delta);
        let adc = acquire(&s.signal, &AdcConfig::new(b, s.lambda_prime, seed + 100).unwrap()).unwrap();
        let rec = unfolder(&s, delta).unfold(&adc, &s.signal).unwrap();
        assert_eq!(rec.residue_errors(&adc), 0);
        let ratio = mse(&rec.estimate, &s.signal.samples) / in_band_noise(b, s.lambda_prime, s.signal.rho, delta);
        assert!((ratio - 1.0).abs() < 0.1, "b={b} OF={of}: ratio {ratio}");
    }
}

#[test]
fn quiet_stretch_leaves_residues_unchanged() {
    let delta = PI / 32.0;
    let s = setup(9, 300, 6.0, delta);
    let adc = acquire(&s.signal, &AdcConfig::noiseless(s.lambda_prime).unwrap()).unwrap();
    let u = unfolder(&s, delta);
    let hop = tukey_window(N, ALPHA).unwrap().hop();
    let base = u.residue(&adc.quantized, &adc.folding_bits).unwrap();
    assert_eq!(base.residue_counts, adc.fold_counts);

    // Find a segment boundary with folds on both sides.
    let len = adc.len();
    let p = (4..len / hop - 4)
        .map(|j| j * hop)
        .find(|&p| {
            adc.folding_bits[p - 2 * N..p].iter().any(|&c| c) && adc.folding_bits[p..p + 2 * N].iter().any(|&c| c)
        })
        .expect("folds on both sides of some boundary");
    let extra = 3 * hop;
    let mut q = adc.quantized[..p].to_vec();
    q.extend(std::iter::repeat_n(adc.quantized[p - 1], extra));
    q.extend_from_slice(&adc.quantized[p..]);
    let mut c = adc.folding_bits[..p].to_vec();
    c.extend(std::iter::repeat_n(false, extra));
    c.extend_from_slice(&adc.folding_bits[p..]);

    let stretched = u.residue(&q, &c).unwrap();
    assert_eq!(&stretched.residue[..p], &base.residue[..p]);
    assert!(stretched.residue[p..p + extra]
        .iter()
        .all(|&z| z == base.residue[p - 1]));
    assert_eq!(&stretched.residue[p + extra..], &base.residue[p..]);
}

#[test]
fn synthetic_pre_estimate_recovers_windowed_jumps() {
    let (of, delta, lp) = (4.0, PI / 32.0, 0.3);
    let sys = build_oob_system(N, 1.0 / of, delta).unwrap();
    let w = tukey_window(N, ALPHA).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let size = rng.random_range(1..=8);
        let mut s = sample(&mut rng, N, size).into_vec();
        s.sort_unstable();
        let mut dz = vec![0.0; N];
        for &i in &s {
            let k: i64 = rng.random_range(1..=3) * if rng.random_bool(0.5) { 1 } else { -1 };
            dz[i] = 2.0 * lp * k as f64;
        }
        // In-band content has no energy on out-of-band bins.
        let mut diffed: Vec<f64> = (0..N).map(|n| w.coefficients[n] * dz[n]).collect();
        for k in 0..=N / 2 {
            if sys.oob_bins.contains(&k) {
                continue;
            }
            let (a, ph): (f64, f64) = (rng.random_range(-0.2..0.2), rng.random_range(0.0..2.0 * PI));
            for (n, d) in diffed.iter_mut().enumerate() {
                *d += a * (2.0 * PI * (k * n) as f64 / N as f64 + ph).cos();
            }
        }

        let est = residue_pre_estimate(&diffed, &s, &sys).unwrap();
        for n in 0..N {
            let want = if s.contains(&n) { w.coefficients[n] * dz[n] } else { 0.0 };
            assert!((est[n] - want).abs() <= 1e-6 * lp, "n={n}: {} vs {want}", est[n]);
        }

        let spec = dft_normalized(&diffed).unwrap();
        let rhs = DVector::from_iterator(sys.k(), sys.oob_bins.iter().map(|&k| spec.bins[k]));
        let ls = least_squares_apply(&select_columns(&sys, &s).unwrap(), &rhs).unwrap();
        assert!(ls.solution.iter().all(|z: &Complex64| z.im.abs() <= 1e-8 * lp));
    }
}

#[test]
fn too_many_folds_in_a_segment_is_reported() {
    let s = setup(1, 50, 4.0, PI / 32.0);
    let u = unfolder(&s, PI / 32.0);
    let len = s.signal.len();
    let flags = vec![true; len];
    let err = u.residue(&s.signal.samples, &flags).unwrap_err();
    match err {
        Error::Segment { index, source } => {
            assert_eq!(index, 0);
            assert!(matches!(*source, Error::OversamplingInsufficient { .. }));
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn mismatched_threshold_rejected() {
    let delta = PI / 32.0;
    let s = setup(2, 50, 6.0, delta);
    let adc = acquire(&s.signal, &AdcConfig::noiseless(s.lambda_prime * 1.1).unwrap()).unwrap();
    assert!(matches!(
        unfolder(&s, delta).unfold(&adc, &s.signal),
        Err(Error::Config(_))
    ));
}

#[test]
fn execution_modes_agree() {
    let delta = PI / 16.0;
    let s = setup(4, 300, 10.0, delta);
    let adc = acquire(&s.signal, &AdcConfig::new(5, s.lambda_prime, 8).unwrap()).unwrap();
    let par = unfolder(&s, delta)
        .with_execution(Execution::Parallel)
        .unfold(&adc, &s.signal)
        .unwrap();
    let seq = unfolder(&s, delta)
        .with_execution(Execution::Sequential)
        .unfold(&adc, &s.signal)
        .unwrap();
    assert_eq!(par.estimate, seq.estimate);
    assert_eq!(par.residue, seq.residue);
}
