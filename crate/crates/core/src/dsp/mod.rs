//! Numeric primitives: normalized DFT, out-of-band DFT systems, least
//! squares, Tukey windows and FIR lowpass filtering.

mod dft;
mod fir;
mod linalg;
mod oob;
mod window;

pub use dft::{dft_normalized, ComplexSpectrum, DftPlan};
pub use fir::{design_lowpass, filter_zero_delay, filter_zero_delay_with, FirLowpass};
pub use linalg::{least_squares_apply, matrix_inf_norm, min_singular_value, LeastSquares};
pub use oob::{build_oob_system, select_columns, OobSystem};
pub use window::{tukey_window, TukeyWindow};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
