//! Unit conventions shared by every module.
//!
//! All public interfaces take ordinary frequencies in MHz; the factor 2π is
//! applied internally when a phase or an angular rate is needed. Pulse and
//! delay durations are in ns, relaxation and bath times in µs. Detunings
//! follow Δ = f_Z − f_probe.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// MHz × ns → cycles.
pub const MHZ_NS: f64 = 1e-3;

/// ns per µs.
pub const NS_PER_US: f64 = 1e3;

/// Phase in radians accumulated by a frequency (MHz) over a duration (ns).
#[inline]
pub fn phase(freq_mhz: f64, dur_ns: f64) -> f64 {
    TWO_PI * freq_mhz * dur_ns * MHZ_NS
}

#[inline]
pub fn us_to_ns(t_us: f64) -> f64 {
    t_us * NS_PER_US
}

#[inline]
pub fn ns_to_us(t_ns: f64) -> f64 {
    t_ns / NS_PER_US
}

/// Gaussian-envelope dephasing time (ns) for a detuning spread σ (MHz):
/// the envelope exp(−(τ/T2*)²) with T2* = √2 / (2πσ).
pub fn t2_star_from_sigma(sigma_mhz: f64) -> f64 {
    std::f64::consts::SQRT_2 / (TWO_PI * sigma_mhz) * NS_PER_US
}

/// Inverse of [`t2_star_from_sigma`]; `t2_star` in ns, result in MHz.
pub fn sigma_from_t2_star(t2_star_ns: f64) -> f64 {
    std::f64::consts::SQRT_2 / (TWO_PI * ns_to_us(t2_star_ns))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_t2_star_round_trip() {
        for s in [0.355, 2.9, 52.0] {
            let t = t2_star_from_sigma(s);
            assert!((sigma_from_t2_star(t) - s).abs() < 1e-12);
        }
        // 2.90 MHz ↔ 77.6 ns
        assert!((t2_star_from_sigma(2.90) - 77.61).abs() < 0.01);
    }

    #[test]
    fn pi_pulse_phase() {
        // 130 MHz over 3.846 ns is half a cycle
        assert!((phase(130.0, 1.0 / 0.26) - PI).abs() < 1e-12);
    }
}
