//! Fits, spectral estimates and closed-form estimators.

mod estimate;
mod fft;
mod fit;

pub use estimate::*;
pub use fft::{fft_sigma, magnitude_spectrum, spectral_peak, SpectralPeak, PEAK_FRACTION, ZERO_PAD};
pub use fit::{fit_curve, fit_decay, FitModel, FitResult, MIN_POINTS, N_STARTS};
pub use crate::sequences::visibility;
