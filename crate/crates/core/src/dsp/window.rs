use std::f64::consts::PI;

use crate::{Error, Result};

/// Tapered-cosine window whose overlapped edges sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TukeyWindow {
    pub n: usize,
    pub alpha: f64,
    pub coefficients: Vec<f64>,
}

impl TukeyWindow {
    /// Number of tapered samples at each edge, `αN/2`.
    pub fn overlap(&self) -> usize {
        overlap_len(self.n, self.alpha)
    }

    /// Segment advance `N(1 − α/2)`.
    pub fn hop(&self) -> usize {
        self.n - self.overlap()
    }
}

fn overlap_len(n: usize, alpha: f64) -> usize {
    ((alpha * n as f64).round() as usize) / 2
}

/// Checks that `α ∈ (0, 1]` and `αN` is an even integer.
pub(crate) fn validate(n: usize, alpha: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("window length must be positive"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("roll-off must lie in (0, 1], got {alpha}")));
    }
    let an = alpha * n as f64;
    let r = an.round();
    if (an - r).abs() > 1e-9 || !(r as u64).is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "alpha*N must be an even integer, got {an} (N = {n}, alpha = {alpha})"
        )));
    }
    Ok(())
}

pub fn tukey_window(n: usize, alpha: f64) -> Result<TukeyWindow> {
    validate(n, alpha)?;
    let e = overlap_len(n, alpha);
    let nf = n as f64;
    let coefficients = (0..n)
        .map(|i| {
            let x = i as f64 / nf;
            if i < e {
                (1.0 + (2.0 * PI / alpha * (x - alpha / 2.0)).cos()) / 2.0
            } else if i < n - e {
                1.0
            } else {
                (1.0 + (2.0 * PI / alpha * (x - 1.0 + alpha / 2.0)).cos()) / 2.0
            }
        })
        .collect();
    Ok(TukeyWindow { n, alpha, coefficients })
}
