use std::f64::consts::PI;

use crate::exec::{fill_indexed, Execution};
use crate::{Error, Result};

/// Passband ripple bound checked after design, in dB.
pub const MAX_RIPPLE_DB: f64 = 0.01;
/// Stopband attenuation bound checked after design, in dB.
pub const MIN_STOPBAND_DB: f64 = 60.0;
/// Attenuation targeted when the length is chosen automatically.
pub const DESIGN_ATTENUATION_DB: f64 = 90.0;

/// Odd-length linear-phase lowpass.
#[derive(Debug, Clone, PartialEq)]
pub struct FirLowpass {
    pub taps: Vec<f64>,
    /// Passband edge in radians/sample.
    pub cutoff: f64,
    /// Width of the transition band following `cutoff`.
    pub transition: f64,
    pub length: usize,
}

impl FirLowpass {
    /// Zero-phase amplitude response `H(ω)`.
    pub fn response(&self, omega: f64) -> f64 {
        let c = self.length / 2;
        self.taps[c]
            + 2.0
                * (1..=c)
                    .map(|m| self.taps[c + m] * (m as f64 * omega).cos())
                    .sum::<f64>()
    }

    /// Worst passband deviation (dB) and weakest stopband attenuation (dB)
    /// over a grid of roughly `8·L` frequencies.
    pub fn measured_response(&self) -> (f64, f64) {
        let points = 8 * self.length;
        let stop_edge = self.cutoff + self.transition;
        let mut ripple = 0.0f64;
        let mut stop = f64::INFINITY;
        let mut eval = |w: f64| {
            let h = self.response(w).abs();
            if w <= self.cutoff {
                ripple = ripple.max((20.0 * h.log10()).abs());
            } else if w >= stop_edge {
                stop = stop.min(-20.0 * h.max(1e-300).log10());
            }
        };
        for i in 0..=points {
            eval(PI * i as f64 / points as f64);
        }
        eval(self.cutoff);
        eval(stop_edge.min(PI));
        (ripple, stop)
    }
}

fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser_attenuation(length: usize, transition: f64) -> f64 {
    2.285 * (length as f64 - 1.0) * transition + 7.95
}

fn required_length(transition: f64, atten_db: f64) -> usize {
    let l = ((atten_db - 7.95) / (2.285 * transition)).ceil() as usize + 1;
    l | 1
}

/// Kaiser-windowed sinc lowpass with ideal cutoff at the middle of the
/// transition band, normalized to unit DC gain.
///
/// `length = None` picks an odd length whose Kaiser estimate reaches
/// [`DESIGN_ATTENUATION_DB`]. Kaiser windows have equal pass and stop ripple,
/// so the response bounds alone would leave about 1e−3 gain error on in-band
/// signal, which shows up above the noise floor at high oversampling. An
/// explicit length that cannot meet the bounds yields a configuration error
/// carrying the required length.
pub fn design_lowpass(cutoff: f64, transition: f64, length: Option<usize>) -> Result<FirLowpass> {
    if !(cutoff > 0.0 && cutoff < PI) {
        return Err(Error::config(format!(
            "lowpass cutoff must lie in (0, π), got {cutoff}"
        )));
    }
    if !(transition > 0.0) || cutoff + transition > PI + 1e-12 {
        return Err(Error::config(format!(
            "transition {transition} must be positive with cutoff + transition ≤ π"
        )));
    }
    // A few dB of margin over the target since the Kaiser formulas are estimates.
    let hint = required_length(transition, MIN_STOPBAND_DB + 6.0);
    let length = match length {
        Some(l) if l % 2 == 0 => return Err(Error::config(format!("lowpass length must be odd, got {l}"))),
        Some(l) => l,
        None => required_length(transition, DESIGN_ATTENUATION_DB),
    };
    let atten = kaiser_attenuation(length, transition).min(120.0);
    if atten < MIN_STOPBAND_DB {
        return Err(Error::config(format!(
            "lowpass length {length} too short for transition {transition:.4}; need at least {hint} taps"
        )));
    }
    let beta = 0.1102 * (atten - 8.7);
    let wc = cutoff + transition / 2.0;
    let c = (length / 2) as f64;
    let i0b = bessel_i0(beta);
    let mut taps: Vec<f64> = (0..length)
        .map(|i| {
            let m = i as f64 - c;
            let ideal = if m == 0.0 { wc / PI } else { (wc * m).sin() / (PI * m) };
            let r = if c == 0.0 { 0.0 } else { m / c };
            ideal * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0b
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    // Enforce exact symmetry after normalization.
    for i in 0..length / 2 {
        taps[length - 1 - i] = taps[i];
    }
    let f = FirLowpass {
        taps,
        cutoff,
        transition,
        length,
    };
    let (ripple, stop) = f.measured_response();
    if ripple > MAX_RIPPLE_DB || stop < MIN_STOPBAND_DB {
        return Err(Error::config(format!(
            "lowpass with {length} taps reaches ripple {ripple:.4} dB and stopband {stop:.1} dB; \
             try at least {} taps",
            (hint.max(length) * 9 / 8) | 1
        )));
    }
    Ok(f)
}

/// Filter with the group delay removed, so output `n` aligns with input `n`.
/// The signal is reflect-padded by `(L − 1)/2` samples at both ends.
pub fn filter_zero_delay(x: &[f64], f: &FirLowpass) -> Result<Vec<f64>> {
    filter_zero_delay_with(Execution::default(), x, f)
}

pub fn filter_zero_delay_with(exec: Execution, x: &[f64], f: &FirLowpass) -> Result<Vec<f64>> {
    let l = f.length;
    if x.len() < l {
        return Err(Error::invalid(format!(
            "signal of {} samples is shorter than the {l}-tap filter",
            x.len()
        )));
    }
    let h = l / 2;
    let n = x.len();
    let mut padded = Vec::with_capacity(n + 2 * h);
    padded.extend((1..=h).rev().map(|i| x[i]));
    padded.extend_from_slice(x);
    padded.extend((0..h).map(|i| x[n - 2 - i]));
    let mut out = vec![0.0; n];
    fill_indexed(exec, &mut out, |i| {
        padded[i..i + l].iter().zip(&f.taps).map(|(a, b)| a * b).sum()
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-14);
        assert!((bessel_i0(10.0) - 2_815.716_628_466_254).abs() < 1e-9);
    }

    #[test]
    fn design_meets_bounds() {
        let f = design_lowpass(PI / 4.0, PI / 16.0, Some(257)).unwrap();
        assert_eq!(f.taps.len(), 257);
        for i in 0..257 {
            assert_eq!(f.taps[i], f.taps[256 - i]);
        }
        assert!((f.taps.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        // Dense DTFT of the raw taps.
        for j in 0..=4000 {
            let w = PI / 4.0 + PI / 16.0 + (3.0 * PI / 4.0 - PI / 16.0) * j as f64 / 4000.0;
            let (mut re, mut im) = (0.0, 0.0);
            for (n, t) in f.taps.iter().enumerate() {
                re += t * (w * n as f64).cos();
                im -= t * (w * n as f64).sin();
            }
            assert!(20.0 * (re * re + im * im).sqrt().log10() <= -60.0, "at {w}");
        }
    }

    #[test]
    fn degenerate_and_short_rejected() {
        assert!(matches!(design_lowpass(PI, 0.1, Some(257)), Err(Error::Config(_))));
        let e = design_lowpass(PI / 4.0, PI / 64.0, Some(101)).unwrap_err();
        assert!(e.to_string().contains("need at least"), "{e}");
        assert!(design_lowpass(PI / 4.0, PI / 16.0, Some(256)).is_err());
    }

    #[test]
    fn auto_length_is_feasible() {
        for &(c, t) in &[(0.1, 0.02), (PI / 2.0, PI / 16.0), (0.05, 0.0125)] {
            let f = design_lowpass(c, t, None).unwrap();
            assert_eq!(f.length % 2, 1);
        }
    }

    #[test]
    fn filtering() {
        let f = design_lowpass(PI / 4.0, PI / 16.0, Some(257)).unwrap();
        let n = 4000;
        assert_eq!(filter_zero_delay(&vec![0.0; n], &f).unwrap(), vec![0.0; n]);

        let dc = filter_zero_delay(&vec![0.7; n], &f).unwrap();
        assert!(dc.iter().all(|v| (v - 0.7).abs() < 1e-6 * 0.7));

        let w_in = PI / 8.0;
        let x: Vec<f64> = (0..n).map(|i| (w_in * i as f64 + 0.3).sin()).collect();
        let y = filter_zero_delay(&x, &f).unwrap();
        for i in 300..n - 300 {
            assert!((y[i] - x[i]).abs() < 2e-3, "sample {i}");
        }

        let w_out = PI / 4.0 + PI / 8.0;
        let x: Vec<f64> = (0..n).map(|i| (w_out * i as f64).sin()).collect();
        let y = filter_zero_delay(&x, &f).unwrap();
        let rms_in = (x[300..n - 300].iter().map(|v| v * v).sum::<f64>()).sqrt();
        let rms_out = (y[300..n - 300].iter().map(|v| v * v).sum::<f64>()).sqrt();
        assert!(20.0 * (rms_out / rms_in).log10() <= -60.0);

        assert!(filter_zero_delay(&x[..100], &f).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = design_lowpass(0.3, 0.1, None).unwrap();
        let x: Vec<f64> = (0..20_000).map(|i| ((i * 31) % 17) as f64).collect();
        assert_eq!(
            filter_zero_delay_with(Execution::Sequential, &x, &f).unwrap(),
            filter_zero_delay_with(Execution::Parallel, &x, &f).unwrap()
        );
    }
}
