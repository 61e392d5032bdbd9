//! Semiclassical Overhauser-field model.
//!
//! Each trajectory carries a quasi-static offset, drawn once per shot, plus
//! an Ornstein–Uhlenbeck component that evolves during free precession.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants as c;
use crate::error::{Error, Result};
use crate::units::{ns_to_us, sigma_from_t2_star, t2_star_from_sigma};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathModel {
    /// Quasi-static Gaussian width σ_OH, MHz.
    pub sigma_static: f64,
    /// Stationary width of the OU component, MHz.
    pub sigma_dyn: f64,
    /// OU correlation time, µs.
    pub tau_corr: f64,
    /// Return-to-warm time of a cooled distribution, µs.
    pub relax_time: f64,
    /// Thermal-equilibrium width, MHz.
    pub sigma_warm: f64,
    /// Single-nucleus coupling quantum A_c, MHz.
    pub a_c: f64,
}

impl Default for BathModel {
    fn default() -> Self {
        Self {
            sigma_static: c::SIGMA_WARM_MHZ,
            sigma_dyn: 0.0,
            tau_corr: 100.0,
            relax_time: c::REWARM_TIME_US,
            sigma_warm: c::SIGMA_WARM_MHZ,
            a_c: c::COUPLING_QUANTUM_MHZ,
        }
    }
}

/// OU width giving a Hahn-echo T2 of 2.93 µs at `tau_corr` = 100 µs, from
/// the slow-noise echo decay exp(−(2πσ)² t³ / 12τ_c).
pub const ECHO_SIGMA_DYN_MHZ: f64 = 1.10;

impl BathModel {
    /// Purely quasi-static bath of width `sigma`.
    pub fn quasi_static(sigma: f64) -> Self {
        Self {
            sigma_static: sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bath.sigma_static", self.sigma_static),
            ("bath.sigma_dyn", self.sigma_dyn),
            ("bath.sigma_warm", self.sigma_warm),
            ("bath.a_c", self.a_c),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, "must be finite and >= 0"));
            }
        }
        if !(self.tau_corr > 0.0) {
            return Err(Error::invalid("bath.tau_corr", "must be > 0"));
        }
        if !(self.relax_time > 0.0) {
            return Err(Error::invalid("bath.relax_time", "must be > 0"));
        }
        Ok(())
    }

    /// Fresh trajectory: quasi-static offset plus a stationary OU draw.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> BathState {
        let offset = sample_detuning(self.sigma_static, rng);
        let dynamic = sample_detuning(self.sigma_dyn, rng);
        BathState {
            delta: offset + dynamic,
            sigma_now: self.sigma_static,
            offset,
        }
    }
}

/// One trajectory of the Overhauser detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathState {
    /// Current total detuning, MHz.
    pub delta: f64,
    /// Ensemble width tracked by the cooling protocols, MHz.
    pub sigma_now: f64,
    /// Quasi-static part of `delta`; the OU process reverts to it.
    pub offset: f64,
}

impl BathState {
    pub fn at(delta: f64) -> Self {
        Self {
            delta,
            sigma_now: 0.0,
            offset: 0.0,
        }
    }

    /// The fluctuating component.
    pub fn dynamic(&self) -> f64 {
        self.delta - self.offset
    }
}

/// δ ~ N(0, σ²).
pub fn sample_detuning<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

/// Exact OU update over `dt` µs.
pub fn ou_step<R: Rng + ?Sized>(state: BathState, dt: f64, model: &BathModel, rng: &mut R) -> BathState {
    if dt <= 0.0 || model.sigma_dyn == 0.0 {
        return state;
    }
    let rho = (-dt / model.tau_corr).exp();
    let noise = model.sigma_dyn * (1.0 - rho * rho).max(0.0).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    BathState {
        delta: state.offset + state.dynamic() * rho + noise * z,
        ..state
    }
}

/// Exact joint OU update over `dt` ns that also returns ∫δ dt over the
/// interval, in MHz·ns.
pub fn ou_step_integrated<R: Rng + ?Sized>(
    state: BathState,
    dt_ns: f64,
    model: &BathModel,
    rng: &mut R,
) -> (BathState, f64) {
    if dt_ns <= 0.0 {
        return (state, 0.0);
    }
    if model.sigma_dyn == 0.0 {
        return (state, state.delta * dt_ns);
    }
    let theta = 1.0 / (model.tau_corr * 1e3); // ns⁻¹
    let s2 = model.sigma_dyn * model.sigma_dyn;
    let x0 = state.dynamic();
    let a = (-theta * dt_ns).exp();
    let var_x = s2 * (1.0 - a * a);
    let var_i = s2 / (theta * theta) * (2.0 * theta * dt_ns - 3.0 + 4.0 * a - a * a);
    let cov = s2 / theta * (1.0 - a) * (1.0 - a);
    // Cholesky of the 2×2 covariance.
    let l11 = var_x.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { cov / l11 } else { 0.0 };
    let l22 = (var_i - l21 * l21).max(0.0).sqrt();
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let x1 = x0 * a + l11 * z1;
    let int_dyn = x0 * (1.0 - a) / theta + l21 * z1 + l22 * z2;
    let next = BathState {
        delta: state.offset + x1,
        ..state
    };
    (next, state.offset * dt_ns + int_dyn)
}

/// Ensemble width after waiting `t_wait` µs: T2* relaxes exponentially from
/// its cooled value to the warm value with time constant `relax_time`.
pub fn rewarm(sigma_now: f64, t_wait: f64, model: &BathModel) -> f64 {
    if t_wait <= 0.0 || sigma_now == model.sigma_warm {
        return sigma_now;
    }
    if sigma_now == 0.0 {
        // infinite T2*: the exponential never returns in finite time
        return 0.0;
    }
    let t_now = t2_star_from_sigma(sigma_now);
    let t_warm = t2_star_from_sigma(model.sigma_warm);
    let t = t_warm + (t_now - t_warm) * (-t_wait / model.relax_time).exp();
    sigma_from_t2_star(t)
}

/// Convenience: OU step with `dt` in ns.
pub fn ou_step_ns<R: Rng + ?Sized>(state: BathState, dt_ns: f64, model: &BathModel, rng: &mut R) -> BathState {
    ou_step(state, ns_to_us(dt_ns), model, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn zero_width_is_zero() {
        let mut rng = substream(1, &[0]);
        assert!((0..100).all(|_| sample_detuning(0.0, &mut rng) == 0.0));
    }

    #[test]
    fn sample_std_converges() {
        let mut rng = substream(3, &[0]);
        let n = 1_000_000;
        let mut s2 = 0.0;
        for _ in 0..n {
            let d = sample_detuning(52.0, &mut rng);
            s2 += d * d;
        }
        let std = (s2 / n as f64).sqrt();
        assert!((std / 52.0 - 1.0).abs() < 0.005, "{std}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let a: Vec<f64> = {
            let mut r = substream(11, &[4]);
            (0..10).map(|_| sample_detuning(2.0, &mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = substream(11, &[4]);
            (0..10).map(|_| sample_detuning(2.0, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn ou_zero_step_is_identity() {
        let model = BathModel {
            sigma_dyn: 1.0,
            ..Default::default()
        };
        let s = BathState::at(0.7);
        let mut rng = substream(1, &[1]);
        assert_eq!(ou_step(s, 0.0, &model, &mut rng), s);
    }

    #[test]
    fn ou_long_step_forgets_start() {
        let model = BathModel {
            sigma_dyn: 2.0,
            tau_corr: 1.0,
            ..Default::default()
        };
        let mut rng = substream(5, &[0]);
        let n = 200_000;
        let (mut m, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let d = ou_step(BathState::at(50.0), 1000.0, &model, &mut rng).delta;
            m += d;
            s2 += d * d;
        }
        m /= n as f64;
        let var = s2 / n as f64 - m * m;
        assert!(m.abs() < 0.02);
        assert!((var / 4.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn ou_autocorrelation_decays_exponentially() {
        let model = BathModel {
            sigma_dyn: 1.0,
            tau_corr: 10.0,
            ..Default::default()
        };
        let mut rng = substream(9, &[0]);
        let dt = 1.0;
        let n = 1_000_000;
        let mut xs = Vec::with_capacity(n);
        let mut s = BathState::at(0.0);
        for _ in 0..n {
            s = ou_step(s, dt, &model, &mut rng);
            xs.push(s.delta);
        }
        let var: f64 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        for lag in [5usize, 10, 20] {
            let c: f64 = xs.windows(lag + 1).map(|w| w[0] * w[lag]).sum::<f64>() / (n - lag) as f64;
            let expected = (-(lag as f64) * dt / model.tau_corr).exp();
            assert!((c / var - expected).abs() < 0.05 * expected.max(0.2), "lag {lag}: {} vs {expected}", c / var);
        }
    }

    #[test]
    fn ou_integral_moments() {
        // Var ∫x dt over T for a stationary OU: 2s²τ²(T/τ − 1 + e^{−T/τ})
        let model = BathModel {
            sigma_dyn: 0.5,
            tau_corr: 2.0,
            ..Default::default()
        };
        let t_ns = 3000.0;
        let mut rng = substream(21, &[0]);
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let s = BathState::at(sample_detuning(0.5, &mut rng));
            let (_, i) = ou_step_integrated(s, t_ns, &model, &mut rng);
            acc += i * i;
        }
        let tau = 2000.0;
        let x = t_ns / tau;
        let expected = 2.0 * 0.25 * tau * tau * (x - 1.0 + (-x).exp());
        assert!((acc / n as f64 / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn ou_integral_of_static_offset() {
        let model = BathModel::quasi_static(1.0);
        let mut rng = substream(2, &[0]);
        let (_, i) = ou_step_integrated(BathState::at(0.3), 100.0, &model, &mut rng);
        assert!((i - 30.0).abs() < 1e-12);
    }

    #[test]
    fn rewarm_endpoints_and_monotone() {
        let model = BathModel::default();
        assert_eq!(rewarm(0.355, 0.0, &model), 0.355);
        assert!((rewarm(0.355, 1e5, &model) - 52.0).abs() < 1e-9);
        let mut last = 0.355;
        for i in 1..200 {
            let s = rewarm(0.355, i as f64, &model);
            assert!(s >= last);
            last = s;
        }
    }
}
