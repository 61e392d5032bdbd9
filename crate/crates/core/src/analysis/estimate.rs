//! Closed-form estimators: bath size, coupling quantum, Rabi quality,
//! spin-pumping fidelity and power-law scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SpeciesRegistry;
use crate::units::{sigma_from_t2_star, TWO_PI};

/// How species abundances enter the bath-size sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbundanceConvention {
    /// Abundance within each sublattice (As sites and Ga sites each sum to 1).
    #[default]
    PerSublattice,
    /// Fraction of all lattice sites: each sublattice carries half the weight.
    SiteFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathEstimate {
    pub n_nuclei: f64,
    /// Single-nucleus coupling A_c, MHz.
    pub a_c: f64,
    /// σ_OH / A_c.
    pub macrostates: f64,
}

/// N = 5/4 Σ_k η_k (2π A_k)² T2*², A_k in MHz and T2* in ns.
pub fn bath_size(t2_star: f64, registry: &SpeciesRegistry, convention: AbundanceConvention) -> Result<f64> {
    if !(t2_star > 0.0) {
        return Err(Error::invalid("t2_star", "must be > 0"));
    }
    let weight = match convention {
        AbundanceConvention::PerSublattice => 1.0,
        AbundanceConvention::SiteFraction => 0.5,
    };
    let t_us = t2_star * 1e-3;
    let mut sum = 0.0;
    let mut used = 0;
    for s in registry.species.iter().filter(|s| s.in_estimator) {
        let a = s
            .hyperfine
            .ok_or_else(|| Error::invalid("registry", format!("species {} has no hyperfine constant", s.name)))?;
        sum += weight * s.abundance * (TWO_PI * a * t_us).powi(2);
        used += 1;
    }
    if used == 0 {
        return Err(Error::invalid("registry", "no species enter the estimator"));
    }
    Ok(1.25 * sum)
}

/// A_c = 1/(√(5N/2)·π·T2*), MHz for T2* in ns.
pub fn coupling_quantum(n_nuclei: f64, t2_star: f64) -> f64 {
    1e3 / ((2.5 * n_nuclei).sqrt() * std::f64::consts::PI * t2_star)
}

/// Number of distinguishable Overhauser macrostates across the distribution.
pub fn macrostates(sigma_oh: f64, a_c: f64) -> f64 {
    sigma_oh / a_c
}

/// Bath size, coupling quantum and macrostate count. `sigma_oh` defaults
/// to the width implied by `t2_star`.
pub fn estimate_bath(
    t2_star: f64,
    registry: &SpeciesRegistry,
    sigma_oh: Option<f64>,
    convention: AbundanceConvention,
) -> Result<BathEstimate> {
    let n_nuclei = bath_size(t2_star, registry, convention)?;
    let a_c = coupling_quantum(n_nuclei, t2_star);
    let sigma = sigma_oh.unwrap_or_else(|| sigma_from_t2_star(t2_star));
    Ok(BathEstimate {
        n_nuclei,
        a_c,
        macrostates: macrostates(sigma, a_c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiMetrics {
    pub q: f64,
    pub f_pi: f64,
}

/// Q = 2·T2_Rabi·f_Rabi (T in ns, f in MHz) and the π-pulse fidelity.
pub fn metrics(t2_rabi: f64, f_rabi: f64) -> Result<RabiMetrics> {
    let q = 2.0 * t2_rabi * f_rabi * 1e-3;
    Ok(RabiMetrics { q, f_pi: pi_fidelity(q)? })
}

/// f_π = ½(1 + e^{−1/Q}).
pub fn pi_fidelity(q: f64) -> Result<f64> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::invalid("Q", "must be finite and > 0"));
    }
    Ok(0.5 * (1.0 + (-1.0 / q).exp()))
}

/// F = √(1 − c_∞/c₀).
pub fn osp_fidelity(c_inf: f64, c0: f64) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(Error::invalid("c0", "must be > 0"));
    }
    if !(0.0..=c0).contains(&c_inf) {
        return Err(Error::invalid("c_inf", "must lie in [0, c0]"));
    }
    Ok((1.0 - c_inf / c0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub gamma: f64,
    /// Standard error of γ; infinite when only two points are given.
    pub gamma_err: f64,
    pub prefactor: f64,
}

/// Fits T2 = c·N^γ by linear regression in log-log space.
pub fn fit_powerlaw(points: &[(f64, f64)]) -> Result<PowerLaw> {
    if points.len() < 2 {
        return Err(Error::invalid("t2_points", "needs at least 2 points"));
    }
    if points.iter().any(|&(n, t)| !(n > 0.0) || !(t > 0.0) || !n.is_finite() || !t.is_finite()) {
        return Err(Error::invalid("t2_points", "values must be finite and > 0"));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("t2_points", "needs at least two distinct N"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let gamma = sxy / sxx;
    let intercept = my - gamma * mx;
    let gamma_err = if points.len() > 2 {
        let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - gamma * x).powi(2)).sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(PowerLaw {
        gamma,
        gamma_err,
        prefactor: intercept.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_gaas_registry;

    #[test]
    fn quality_factor_and_pi_fidelity() {
        let m = metrics(73.0, 130.0).unwrap();
        assert!((m.q - 18.98).abs() < 1e-9);
        assert!((m.f_pi - 0.5 * (1.0 + (-1.0 / 18.98f64).exp())).abs() < 1e-15);
        assert!((m.f_pi - 0.9745).abs() < 5e-4);
        assert!((pi_fidelity(30.0).unwrap() - 0.9836).abs() < 1e-4);
        assert!(pi_fidelity(0.0).is_err());
    }

    #[test]
    fn spin_pumping_fidelity() {
        assert_eq!(osp_fidelity(0.0, 3.0).unwrap(), 1.0);
        assert!((osp_fidelity(0.0597, 3.0).unwrap() - 0.99).abs() < 1e-3);
        assert!(osp_fidelity(1.0, 0.0).is_err());
    }

    #[test]
    fn bath_size_both_conventions() {
        let reg = default_gaas_registry();
        for conv in [AbundanceConvention::PerSublattice, AbundanceConvention::SiteFraction] {
            let n = bath_size(3.9, &reg, conv).unwrap();
            assert!(n > 0.7e5 && n < 2.8e5, "{conv:?}: {n}");
        }
        let a = bath_size(3.9, &reg, AbundanceConvention::PerSublattice).unwrap();
        let b = bath_size(3.9, &reg, AbundanceConvention::SiteFraction).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_quantum_and_macrostates() {
        assert!((coupling_quantum(1.4e5, 3.9) - 0.138).abs() < 5e-4);
        assert!((macrostates(0.355, 0.138) - 2.6).abs() < 0.1);
    }

    #[test]
    fn doubling_t2_quadruples_n() {
        let reg = default_gaas_registry();
        let c = AbundanceConvention::default();
        let a = estimate_bath(3.9, &reg, None, c).unwrap();
        let b = estimate_bath(7.8, &reg, None, c).unwrap();
        assert!((b.n_nuclei / a.n_nuclei - 4.0).abs() < 1e-12);
        // A_c ∝ 1/(T2*·√N): doubling T2* quarters A_c
        assert!((a.a_c / b.a_c - 4.0).abs() < 1e-12);
    }

    #[test]
    fn powerlaw_exact_and_endpoints() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 10.0, 20.0].iter().map(|&n| (n, 2.93 * f64::powf(n, 0.69))).collect();
        let fit = fit_powerlaw(&pts).unwrap();
        assert!((fit.gamma - 0.69).abs() < 1e-9);
        let ends = fit_powerlaw(&[(1.0, 2.93), (20.0, 22.0)]).unwrap();
        assert!((ends.gamma - 0.67).abs() < 0.005);
        assert!(ends.gamma_err.is_infinite());
        assert!(fit_powerlaw(&[(1.0, -1.0), (2.0, 1.0)]).is_err());
    }
}
