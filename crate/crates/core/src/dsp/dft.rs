use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Spectrum of a length-`n` real sequence under the unitary `1/√N` convention.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub bins: Vec<Complex64>,
    pub n: usize,
}

/// A reusable forward transform of fixed length.
#[derive(Clone)]
pub struct DftPlan {
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan").field("n", &self.len()).finish()
    }
}

impl DftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("DFT length must be at least 1"));
        }
        let fft = FftPlanner::new().plan_fft_forward(n);
        Ok(Self {
            fft,
            scale: 1.0 / (n as f64).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.fft.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transform `x` (length must equal the plan length) into `out`.
    pub fn forward_into(&self, x: &[f64], out: &mut Vec<Complex64>) {
        assert_eq!(x.len(), self.len(), "DFT input length mismatch");
        out.clear();
        out.extend(x.iter().map(|&v| Complex64::new(v, 0.0)));
        self.fft.process(out);
        for v in out.iter_mut() {
            *v *= self.scale;
        }
    }

    pub fn forward(&self, x: &[f64]) -> ComplexSpectrum {
        let mut bins = Vec::with_capacity(x.len());
        self.forward_into(x, &mut bins);
        ComplexSpectrum { bins, n: x.len() }
    }
}

/// `X[k] = (1/√N) Σ x[n] e^{-j2πkn/N}`.
pub fn dft_normalized(x: &[f64]) -> Result<ComplexSpectrum> {
    Ok(DftPlan::new(x.len())?.forward(x))
}
