//! Closed-form parameter rules, MSE predictions, the Monte-Carlo estimate of
//! the residue-map norm `M`, and the complexity model.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adc::quantizer_range;
use crate::dsp::{build_oob_system, least_squares_apply, matrix_inf_norm, select_columns, OobSystem};
use crate::exec::{map_indexed, Execution};
use crate::{db, Error, Result};

/// `K_SL = 2⌈δ_SL·N/π⌉`.
pub fn spectral_leakage_bins(delta_sl: f64, n: usize) -> usize {
    let x = delta_sl * n as f64 / PI;
    // Guard against values like 2.0000000000000004 from rounding.
    2 * ((x - 1e-9).ceil().max(0.0) as usize)
}

/// Minimal oversampling for a segment holding at most `max_s` folds:
/// `N/(N − max_s − K_SL)`.
pub fn of_sufficient_general(n: usize, max_s: usize, k_sl: usize) -> Result<f64> {
    if n <= max_s + k_sl {
        return Err(Error::infeasible(format!(
            "N = {n} must exceed max|S| + K_SL = {}",
            max_s + k_sl
        )));
    }
    Ok(n as f64 / (n - max_s - k_sl) as f64)
}

/// Minimal oversampling with `λ'` set by [`lambda_prime_required`]:
/// `3/(1 − K_SL/N)`.
pub fn of_sufficient(n: usize, k_sl: usize) -> Result<f64> {
    if k_sl >= n {
        return Err(Error::infeasible(format!("K_SL = {k_sl} must be below N = {n}")));
    }
    Ok(3.0 / (1.0 - k_sl as f64 / n as f64))
}

/// `λ' = ‖f‖∞ / (OF(1 − K_SL/N) − 2)`.
pub fn lambda_prime_required(f_inf: f64, of: f64, k_sl: usize, n: usize) -> Result<f64> {
    let den = of * (1.0 - k_sl as f64 / n as f64) - 2.0;
    if !(den > 0.0) {
        return Err(Error::infeasible(format!(
            "OF·(1 − K_SL/N) = {:.4} must exceed 2",
            den + 2.0
        )));
    }
    Ok(f_inf / den)
}

/// Bits needed for exact residue recovery: `3 + log₂(1 + 0.75·M)`; the
/// condition is strict, `b > b_sufficient(M)`.
pub fn b_sufficient(m: f64) -> f64 {
    3.0 + (1.0 + 0.75 * m).log2()
}

/// `λ²/2^{2b}`.
pub fn quantization_noise_power(b: u32, lambda: f64) -> f64 {
    lambda * lambda / 4f64.powi(b as i32)
}

/// `‖f‖²(1 + δ·OF/π) / (OF(2^b − 2)²(OF(1 − K/N) − 2)²)`.
pub fn mse_guarantee(f_inf: f64, of: f64, b: u32, k_sl: usize, delta_sl: f64, n: usize) -> Result<f64> {
    let of_min = of_sufficient(n, k_sl)?;
    if of < of_min {
        return Err(Error::infeasible(format!(
            "OF = {of} is below the sufficient {of_min:.4}"
        )));
    }
    if b < 2 {
        return Err(Error::infeasible("at least 2 bits are required"));
    }
    let q = 2f64.powi(b as i32) - 2.0;
    let g = of * (1.0 - k_sl as f64 / n as f64) - 2.0;
    Ok(f_inf * f_inf * (1.0 + delta_sl / PI * of) / (of * q * q * g * g))
}

/// `‖f‖²/(OF(2^b − 2)²)`.
pub fn mse_conventional(f_inf: f64, of: f64, b: u32) -> f64 {
    let q = 2f64.powi(b as i32) - 2.0;
    f_inf * f_inf / (of * q * q)
}

/// `‖V_S† V_{S^c}‖∞` for one fold set, via the complex least-squares map.
pub fn fold_map_norm(sys: &OobSystem, s: &[usize]) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    let a = select_columns(sys, s)?;
    let comp: Vec<usize> = (0..sys.n).filter(|i| !s.contains(i)).collect();
    let b = select_columns(sys, &comp)?;
    let mut x = DMatrix::zeros(s.len(), comp.len());
    for j in 0..comp.len() {
        let ls = least_squares_apply(&a, &b.column(j).into_owned())?;
        x.set_column(j, &ls.solution);
    }
    Ok(matrix_inf_norm(&x))
}

/// Same quantity through the real circulant Gram matrix `P = VᴴV`:
/// `V_S† V_{S^c} = P_SS⁻¹ P_{S,S^c}`. Falls back to the direct route when
/// `P_SS` is not numerically positive definite.
pub fn fold_map_norm_gram(sys: &OobSystem, kernel: &[f64], s: &[usize]) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    let n = sys.n;
    let mut in_s = vec![false; n];
    for &i in s {
        in_s[i] = true;
    }
    let comp: Vec<usize> = (0..n).filter(|&i| !in_s[i]).collect();
    let p = |i: usize, j: usize| kernel[(i + n - j) % n];
    let gss = DMatrix::from_fn(s.len(), s.len(), |r, c| p(s[r], s[c]));
    let Some(chol) = gss.cholesky() else {
        return fold_map_norm(sys, s);
    };
    let mut rhs = DMatrix::from_fn(s.len(), comp.len(), |r, c| p(s[r], comp[c]));
    chol.solve_mut(&mut rhs);
    Ok(matrix_inf_norm(&rhs))
}

/// `M̃`: the largest `‖V_S† V_{S^c}‖∞` over `trials` uniformly random fold
/// sets of size `s_size`. Trial `i` draws from stream `i` of `seed`, so more
/// trials never lower the estimate.
pub fn estimate_m(n: usize, of: f64, delta_sl: f64, s_size: usize, trials: usize, seed: u64) -> Result<f64> {
    estimate_m_with(Execution::default(), n, of, delta_sl, s_size, trials, seed)
}

pub fn estimate_m_with(
    exec: Execution,
    n: usize,
    of: f64,
    delta_sl: f64,
    s_size: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(of > 1.0) {
        return Err(Error::invalid(format!("oversampling factor must exceed 1, got {of}")));
    }
    let sys = build_oob_system(n, 1.0 / of, delta_sl)?;
    if s_size > sys.k() {
        return Err(Error::infeasible(format!(
            "|S| = {s_size} exceeds the {} out-of-band equations",
            sys.k()
        )));
    }
    if s_size == 0 || trials == 0 {
        return Ok(0.0);
    }
    let kernel = sys.gram_kernel();
    let norms = map_indexed(exec, trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut s = sample(&mut rng, n, s_size).into_vec();
        s.sort_unstable();
        fold_map_norm_gram(&sys, &kernel, &s)
    });
    norms.into_iter().try_fold(0.0f64, |acc, m| Ok(acc.max(m?)))
}

/// Operation-count model for segment-wise versus whole-record processing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    /// `N0/(N(1 − α/2))`.
    pub segments: f64,
    /// `(1 − ρ)³N³`.
    pub per_segment_flops: f64,
    /// `N0(1 − ρ)³N²/(1 − α/2)`.
    pub total_order: f64,
    /// Segment-wise cost over whole-record cost `(1 − ρ)³N0³`.
    pub relative_cost: f64,
    pub speedup: f64,
}

pub fn complexity_estimate(n0: usize, n: usize, alpha: f64, rho: f64) -> Result<ComplexityEstimate> {
    if n == 0 || n0 == 0 || n > n0 {
        return Err(Error::invalid(format!("need 0 < N ≤ N0, got N = {n}, N0 = {n0}")));
    }
    if !(0.0..=1.0).contains(&alpha) || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid("alpha must lie in [0, 1] and rho in (0, 1)"));
    }
    let (n0, n) = (n0 as f64, n as f64);
    let segments = n0 / (n * (1.0 - alpha / 2.0));
    let c = (1.0 - rho).powi(3);
    let per_segment_flops = c * n.powi(3);
    let total_order = segments * per_segment_flops;
    let relative_cost = total_order / (c * n0.powi(3));
    Ok(ComplexityEstimate {
        segments,
        per_segment_flops,
        total_order,
        relative_cost,
        speedup: 1.0 / relative_cost,
    })
}

/// Parameters and predictions at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub oversampling_factor: f64,
    pub bits: u32,
    pub n: usize,
    pub k_sl: usize,
    pub delta_sl: f64,
    pub lambda_prime: f64,
    pub lambda: f64,
    pub of_required: f64,
    pub of_sufficient: bool,
    /// `M̃` used for the bit check, when one was supplied.
    pub m_tilde: Option<f64>,
    pub b_required: Option<f64>,
    /// Advisory: `M̃` is a Monte-Carlo surrogate for the true bound.
    pub b_sufficient: Option<bool>,
    pub mse_modulo: f64,
    pub mse_modulo_db: f64,
    pub mse_conventional: f64,
    pub mse_conventional_db: f64,
}

pub fn theory_report(
    f_inf: f64,
    of: f64,
    b: u32,
    n: usize,
    delta_sl: f64,
    m_tilde: Option<f64>,
) -> Result<TheoryReport> {
    let k_sl = spectral_leakage_bins(delta_sl, n);
    let of_required = of_sufficient(n, k_sl)?;
    let lambda_prime = lambda_prime_required(f_inf, of, k_sl, n)?;
    let mse_modulo = mse_guarantee(f_inf, of, b, k_sl, delta_sl, n)?;
    let mse_conv = mse_conventional(f_inf, of, b);
    let b_required = m_tilde.map(b_sufficient);
    Ok(TheoryReport {
        oversampling_factor: of,
        bits: b,
        n,
        k_sl,
        delta_sl,
        lambda_prime,
        lambda: quantizer_range(b, lambda_prime),
        of_required,
        of_sufficient: of >= of_required,
        m_tilde,
        b_required,
        b_sufficient: b_required.map(|r| b as f64 > r),
        mse_modulo,
        mse_modulo_db: db(mse_modulo),
        mse_conventional: mse_conv,
        mse_conventional_db: db(mse_conv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leakage_bins() {
        assert_eq!(spectral_leakage_bins(PI / 32.0, 64), 4);
        assert_eq!(spectral_leakage_bins(PI / 16.0, 64), 8);
        assert_eq!(spectral_leakage_bins(0.0, 128), 0);
        assert_eq!(spectral_leakage_bins(0.01, 64), 2);
    }

    #[test]
    fn oversampling_rules() {
        assert_eq!(of_sufficient_general(64, 0, 0).unwrap(), 1.0);
        assert!((of_sufficient_general(64, 8, 4).unwrap() - 64.0 / 52.0).abs() < 1e-15);
        assert!(matches!(of_sufficient_general(64, 60, 4), Err(Error::Infeasible(_))));
        assert_eq!(of_sufficient(64, 0).unwrap(), 3.0);
        assert!((of_sufficient(64, 4).unwrap() - 3.2).abs() < 1e-15);
        assert!((of_sufficient(64, 8).unwrap() - 3.0 / 0.875).abs() < 1e-15);
        assert!(of_sufficient(8, 8).is_err());
        assert!((of_sufficient(1 << 20, 4).unwrap() - 3.0).abs() < 1e-4);
    }

    #[test]
    fn threshold_and_bits() {
        assert!((lambda_prime_required(1.25, 4.0, 0, 64).unwrap() - 0.625).abs() < 1e-15);
        assert!((lambda_prime_required(1.0, 4.0, 4, 64).unwrap() - 1.0 / 1.75).abs() < 1e-15);
        assert!(lambda_prime_required(1.0, 2.0, 0, 64).is_err());
        assert_eq!(b_sufficient(0.0), 3.0);
        assert!((b_sufficient(4.0) - 5.0).abs() < 1e-15);
        assert!((b_sufficient(20.0) - 7.0).abs() < 1e-15);
    }

    #[test]
    fn mse_values() {
        let m = mse_guarantee(1.0, 4.0, 4, 0, 0.0, 64).unwrap();
        assert!((m - 1.0 / (4.0 * 196.0 * 4.0)).abs() < 1e-18);
        assert!((db(m) + 34.96).abs() < 0.01);
        assert!((mse_conventional(1.0, 4.0, 4) - 1.0 / 784.0).abs() < 1e-18);
        assert!((mse_conventional(1.0, 8.0, 4) * 2.0 - 1.0 / 784.0).abs() < 1e-18);
        assert!((mse_conventional(2.0, 4.0, 4) - 4.0 / 784.0).abs() < 1e-18);
        assert_eq!(quantization_noise_power(4, 1.0), 1.0 / 256.0);
        assert_eq!(quantization_noise_power(4, 2.0), 4.0 / 256.0);
        assert!(mse_guarantee(1.0, 3.0, 4, 4, PI / 32.0, 64).is_err());
    }

    #[test]
    fn gap_at_paper_point() {
        let m = mse_guarantee(1.0, 40.0, 4, 8, PI / 16.0, 64).unwrap();
        let gap = db(mse_conventional(1.0, 40.0, 4)) - db(m);
        assert!((gap - db(1089.0 / 3.5)).abs() < 1e-9);
        assert!((20.0..=26.0).contains(&gap), "gap {gap}");
    }

    #[test]
    fn complexity() {
        let c = complexity_estimate(100_000, 256, 0.25, 0.25).unwrap();
        assert!((c.relative_cost / 7.48e-6 - 1.0).abs() < 5e-3);
        let whole = complexity_estimate(4096, 4096, 0.0, 0.25).unwrap();
        assert_eq!(whole.segments, 1.0);
        assert!((whole.total_order - 0.75f64.powi(3) * 4096f64.powi(3)).abs() < 1e-3);
        let a = complexity_estimate(10_000, 64, 0.5, 0.25).unwrap();
        let b = complexity_estimate(20_000, 64, 0.5, 0.25).unwrap();
        assert_eq!(b.segments, 2.0 * a.segments);
    }

    #[test]
    fn gram_route_matches_direct() {
        let sys = build_oob_system(64, 0.25, PI / 32.0).unwrap();
        let kernel = sys.gram_kernel();
        for s in [
            vec![3usize, 17],
            vec![0, 1, 2, 40, 63],
            vec![5, 9, 13, 21, 30, 44, 50, 61],
        ] {
            let a = fold_map_norm(&sys, &s).unwrap();
            let b = fold_map_norm_gram(&sys, &kernel, &s).unwrap();
            assert!((a - b).abs() < 1e-8 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn m_estimate_basics() {
        assert_eq!(estimate_m(64, 4.0, PI / 32.0, 0, 100, 1).unwrap(), 0.0);
        assert!(matches!(
            estimate_m(64, 4.0, PI / 32.0, 46, 10, 1),
            Err(Error::Infeasible(_))
        ));
        let a = estimate_m(64, 4.0, PI / 32.0, 4, 200, 7).unwrap();
        let b = estimate_m(64, 4.0, PI / 32.0, 4, 400, 7).unwrap();
        assert!(b >= a && a > 0.0);
        assert_eq!(
            a,
            estimate_m_with(Execution::Sequential, 64, 4.0, PI / 32.0, 4, 200, 7).unwrap()
        );
    }

    #[test]
    fn report() {
        let r = theory_report(1.0, 8.0, 4, 64, PI / 32.0, Some(4.0)).unwrap();
        assert_eq!(r.k_sl, 4);
        assert!(r.of_sufficient);
        assert_eq!(r.b_sufficient, Some(false));
        assert!((r.lambda - 16.0 / 14.0 * r.lambda_prime).abs() < 1e-15);
    }
}
