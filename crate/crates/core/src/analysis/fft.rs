//! Spectral width of a Ramsey visibility trace.
//!
//! The trace is mirrored about its first sample so that a Gaussian envelope
//! exp(−(τ/T2*)²) becomes a Gaussian line whose standard deviation in
//! frequency is √2/(2π·T2*), i.e. σ_OH itself.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::fit::least_squares;
use crate::error::{Error, Result};
use crate::sequences::Envelope;

/// Zero-padding factor applied before the transform.
pub const ZERO_PAD: usize = 8;
/// Fraction of the peak height that bounds the fitted region.
pub const PEAK_FRACTION: f64 = 0.2;

/// Centre and width of the dominant spectral line, MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub center: f64,
    pub sigma: f64,
}

/// Relative tolerance on grid spacing.
const UNIFORM_TOL: f64 = 1e-6;

fn uniform_step(sweep: &[f64]) -> Result<f64> {
    if sweep.len() < 3 {
        return Err(Error::invalid("envelope", "needs at least 3 points"));
    }
    let step = sweep[1] - sweep[0];
    if !(step > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    if sweep.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > UNIFORM_TOL * step) {
        return Err(Error::NonUniformGrid);
    }
    Ok(step)
}

/// Two-sided magnitude spectrum of the mirrored, zero-padded trace, in
/// ascending frequency order. Sweep in ns, frequencies in MHz.
pub fn magnitude_spectrum(sweep: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let step = uniform_step(sweep)?;
    let mirrored: Vec<f64> = values.iter().rev().chain(&values[1..]).copied().collect();
    let len = mirrored.len() * ZERO_PAD;
    let mut buf: Vec<Complex<f64>> = mirrored.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let df = 1e3 / (len as f64 * step);
    let half = len / 2;
    let (mut freq, mut mag) = (Vec::with_capacity(len), Vec::with_capacity(len));
    for k in 0..len {
        let idx = (k + len - half) % len;
        let f = if idx >= len - half { idx as f64 - len as f64 } else { idx as f64 };
        freq.push(f * df);
        mag.push(buf[idx].norm());
    }
    Ok((freq, mag))
}

/// Gaussian fit to the strongest non-negative-frequency line.
pub fn spectral_peak(envelope: &Envelope) -> Result<SpectralPeak> {
    if envelope.visibility.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("envelope", "visibility must be finite"));
    }
    let (freq, mag) = magnitude_spectrum(&envelope.sweep, &envelope.visibility)?;
    let peak = (0..freq.len())
        .filter(|&k| freq[k] >= 0.0)
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .expect("spectrum has non-negative frequencies");
    let height = mag[peak];
    if !(height > 0.0) {
        return Err(Error::invalid("envelope", "visibility trace is identically zero"));
    }
    let threshold = PEAK_FRACTION * height;
    let mut lo = peak;
    while lo > 0 && mag[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < freq.len() && mag[hi + 1] >= threshold {
        hi += 1;
    }
    // Keep enough points for a three-parameter fit.
    while hi - lo + 1 < 7 {
        lo = lo.saturating_sub(1);
        hi = (hi + 1).min(freq.len() - 1);
    }
    let x = &freq[lo..=hi];
    let y = &mag[lo..=hi];
    let width0 = ((x[x.len() - 1] - x[0]) / 4.0).max(f64::MIN_POSITIVE);
    let line = |f: f64, p: &[f64]| p[0] * (-(f - p[2]).powi(2) / (2.0 * p[1] * p[1])).exp();
    let starts = [vec![height, width0, freq[peak]]];
    let (p, _, _) = least_squares(&line, &[false, true, false], x, y, &starts).map_err(|best_residual| {
        Error::FitFailed {
            model: "spectral_gaussian".into(),
            best_residual,
        }
    })?;
    Ok(SpectralPeak {
        center: p[2].abs(),
        sigma: p[1],
    })
}

/// σ_OH (MHz) from the spectral width of a Ramsey visibility trace.
pub fn fft_sigma(envelope: &Envelope) -> Result<f64> {
    spectral_peak(envelope).map(|p| p.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{sigma_from_t2_star, TWO_PI};

    fn gaussian_trace(t2: f64, serrodyne: f64, dt: f64, n: usize) -> Envelope {
        let sweep: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let vis: Vec<f64> = sweep
            .iter()
            .map(|&t| (-(t / t2).powi(2)).exp() * (TWO_PI * serrodyne * t * 1e-3).cos())
            .collect();
        Envelope {
            shots: 1,
            top: vis.clone(),
            bottom: vec![0.0; n],
            visibility: vis,
            sweep,
        }
    }

    #[test]
    fn width_of_78ns_envelope() {
        let sigma = fft_sigma(&gaussian_trace(78.0, 0.0, 2.0, 300)).unwrap();
        assert!((sigma / 2.90 - 1.0).abs() < 0.03, "{sigma}");
    }

    #[test]
    fn serrodyne_shifts_without_broadening() {
        let plain = spectral_peak(&gaussian_trace(78.0, 0.0, 2.0, 300)).unwrap();
        let shifted = spectral_peak(&gaussian_trace(78.0, 20.0, 2.0, 300)).unwrap();
        assert!((shifted.center - 20.0).abs() < 0.05, "{}", shifted.center);
        assert!(plain.center.abs() < 1e-6);
        assert!((shifted.sigma / plain.sigma - 1.0).abs() < 0.02);
    }

    #[test]
    fn width_within_two_bins() {
        for (t2, dt, n) in [(4.33, 0.25, 200), (78.0, 2.0, 300), (634.0, 10.0, 400)] {
            let sigma = fft_sigma(&gaussian_trace(t2, 0.0, dt, n)).unwrap();
            let bin = 1e3 / ((2 * n - 1) as f64 * ZERO_PAD as f64 * dt);
            assert!((sigma - sigma_from_t2_star(t2)).abs() < 2.0 * bin, "{t2}: {sigma}");
        }
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let mut env = gaussian_trace(78.0, 0.0, 2.0, 50);
        env.sweep[10] += 0.5;
        assert!(matches!(fft_sigma(&env), Err(Error::NonUniformGrid)));
    }
}
