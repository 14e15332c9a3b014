use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Out-of-band rows of the unitary DFT matrix for a given band and guard.
#[derive(Debug, Clone)]
pub struct OobSystem {
    pub n: usize,
    pub rho: f64,
    pub delta_sl: f64,
    /// Sorted DFT indices `k` with `2πk/N` strictly inside
    /// `(ρπ + δ, 2π − ρπ − δ)`.
    pub oob_bins: Vec<usize>,
    /// `K × N`, entry `(k', n) = e^{-j2πn·k/N}/√N` with `k = oob_bins[k']`.
    pub v: DMatrix<Complex64>,
}

impl OobSystem {
    pub fn k(&self) -> usize {
        self.oob_bins.len()
    }

    /// First row of the real circulant Gram matrix `VᴴV`:
    /// `p[d] = (1/N) Σ_{k∈OOB} cos(2πkd/N)`.
    pub fn gram_kernel(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|d| {
                self.oob_bins
                    .iter()
                    .map(|&k| (2.0 * PI * ((k * d) % n) as f64 / n as f64).cos())
                    .sum::<f64>()
                    / n as f64
            })
            .collect()
    }
}

fn entry(n: usize, k: usize, col: usize) -> Complex64 {
    Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * PI * ((k * col) % n) as f64 / n as f64)
}

pub fn build_oob_system(n: usize, rho: f64, delta_sl: f64) -> Result<OobSystem> {
    if n == 0 {
        return Err(Error::invalid("window length must be positive"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1), got {rho}")));
    }
    if !(delta_sl >= 0.0) {
        return Err(Error::invalid(format!("delta_sl must be non-negative, got {delta_sl}")));
    }
    // Compare in units of bins; open interval with a small guard so that
    // exact band edges are excluded despite rounding.
    let nf = n as f64;
    let lo = nf * (rho + delta_sl / PI) / 2.0;
    let hi = nf * (2.0 - rho - delta_sl / PI) / 2.0;
    let tol = 1e-9;
    let oob_bins: Vec<usize> = (0..n)
        .filter(|&k| {
            let k = k as f64;
            k > lo + tol && k < hi - tol
        })
        .collect();
    if oob_bins.is_empty() {
        return Err(Error::config(format!(
            "no out-of-band bins for N = {n}, rho = {rho}, delta_sl = {delta_sl}"
        )));
    }
    let v = DMatrix::from_fn(oob_bins.len(), n, |r, c| entry(n, oob_bins[r], c));
    Ok(OobSystem {
        n,
        rho,
        delta_sl,
        oob_bins,
        v,
    })
}

/// Columns of `V` indexed by `s`, in the given order.
pub fn select_columns(sys: &OobSystem, s: &[usize]) -> Result<DMatrix<Complex64>> {
    let mut seen = vec![false; sys.n];
    for &i in s {
        if i >= sys.n {
            return Err(Error::invalid(format!("column {i} out of range 0..{}", sys.n)));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!("duplicate column {i}")));
        }
    }
    Ok(sys.v.select_columns(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_counts() {
        let s = build_oob_system(64, 0.25, PI / 32.0).unwrap();
        let brute: Vec<usize> = (0..64)
            .filter(|&k| {
                let w = 2.0 * PI * k as f64 / 64.0;
                w > 9.0 * PI / 32.0 + 1e-12 && w < 55.0 * PI / 32.0 - 1e-12
            })
            .collect();
        assert_eq!(s.oob_bins, brute);
        assert_eq!(s.k(), 45);
        assert_eq!(s.oob_bins.first(), Some(&10));
        assert_eq!(s.oob_bins.last(), Some(&54));

        assert_eq!(build_oob_system(8, 0.5, 0.0).unwrap().oob_bins, vec![3, 4, 5]);
        assert_eq!(build_oob_system(8, 7.0 / 8.0, 0.0).unwrap().oob_bins, vec![4]);
    }

    #[test]
    fn empty_band_is_config_error() {
        assert!(matches!(build_oob_system(8, 0.5, PI / 2.0), Err(Error::Config(_))));
        assert!(build_oob_system(8, 1.0, 0.0).is_err());
    }

    #[test]
    fn rows_unit_norm() {
        let s = build_oob_system(32, 0.3, 0.1).unwrap();
        for r in 0..s.k() {
            let norm: f64 = s.v.row(r).iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn columns() {
        let s = build_oob_system(64, 0.25, PI / 32.0).unwrap();
        assert_eq!(select_columns(&s, &[]).unwrap().shape(), (45, 0));
        let all: Vec<usize> = (0..64).collect();
        assert_eq!(select_columns(&s, &all).unwrap(), s.v);
        let m = select_columns(&s, &[3, 17]).unwrap();
        for (r, &k) in s.oob_bins.iter().enumerate() {
            for (j, &c) in [3usize, 17].iter().enumerate() {
                let want = Complex64::from_polar(0.125, -2.0 * PI * (c * k) as f64 / 64.0);
                assert!((m[(r, j)] - want).norm() < 1e-14);
            }
        }
        assert!(select_columns(&s, &[64]).is_err());
        assert!(select_columns(&s, &[2, 2]).is_err());
    }

    #[test]
    fn gram_kernel_matches_product() {
        let s = build_oob_system(16, 0.3, 0.05).unwrap();
        let g = s.v.adjoint() * &s.v;
        let p = s.gram_kernel();
        for i in 0..16 {
            for j in 0..16 {
                let d = (i + 16 - j) % 16;
                assert!((g[(i, j)].re - p[d]).abs() < 1e-12);
                assert!(g[(i, j)].im.abs() < 1e-12);
            }
        }
    }
}
