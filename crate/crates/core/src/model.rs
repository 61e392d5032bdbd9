//! Physical parameters of the qubit and the nuclear-species registry.

use serde::{Deserialize, Serialize};

use crate::constants as c;
use crate::error::{Error, Result};

/// Electron-spin qubit parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QubitParams {
    /// Electron Zeeman frequency, MHz.
    pub f_zeeman: f64,
    pub g_factor: f64,
    /// Longitudinal relaxation time, µs.
    pub t1: f64,
    /// Optical spin-pumping time, ns.
    pub osp_time: f64,
    /// Probability that initialization (and readout) assigns the right state.
    pub osp_fidelity: f64,
    /// Drive-induced spin-flip rate per unit Rabi frequency (κ/Ω).
    pub kappa_ratio: f64,
    /// Bath temperature, K. Sets the thermal polarization that T1 relaxes to.
    pub temperature: f64,
}

impl Default for QubitParams {
    fn default() -> Self {
        Self {
            f_zeeman: c::ELECTRON_ZEEMAN_MHZ,
            g_factor: c::ELECTRON_G_FACTOR,
            t1: c::ELECTRON_T1_US,
            osp_time: c::OSP_TIME_NS,
            osp_fidelity: c::OSP_FIDELITY,
            kappa_ratio: c::KAPPA_RATIO,
            temperature: c::TEMPERATURE_K,
        }
    }
}

impl QubitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_zeeman > 0.0) {
            return Err(Error::invalid("qubit.f_zeeman", "must be > 0"));
        }
        if !(self.t1 > 0.0) {
            return Err(Error::invalid("qubit.t1", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.osp_fidelity) {
            return Err(Error::invalid("qubit.osp_fidelity", "must lie in [0, 1]"));
        }
        if !(self.kappa_ratio >= 0.0) {
            return Err(Error::invalid("qubit.kappa_ratio", "must be >= 0"));
        }
        if !(self.osp_time >= 0.0) {
            return Err(Error::invalid("qubit.osp_time", "must be >= 0"));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::invalid("qubit.temperature", "must be >= 0"));
        }
        Ok(())
    }

    /// Equilibrium z-polarization, tanh(h f_Z / 2 k T); |↑⟩ is the lower level.
    pub fn thermal_z(&self) -> f64 {
        if self.temperature == 0.0 {
            return 1.0;
        }
        let x = c::PLANCK_J_S * self.f_zeeman * 1e6 / (2.0 * c::BOLTZMANN_J_K * self.temperature);
        x.tanh()
    }

    /// Spin-flip rate (MHz, κ/2π) while driving at Rabi frequency `rabi`.
    pub fn flip_rate(&self, rabi: f64) -> f64 {
        self.kappa_ratio * rabi
    }
}

/// One nuclear isotope of the host lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearSpecies {
    pub name: String,
    /// Larmor frequency at the registry field, MHz.
    pub larmor: f64,
    /// Abundance within the host sublattice.
    pub abundance: f64,
    /// Total hyperfine constant A_k, MHz. `None` for species that do not
    /// enter the bath-size estimate.
    pub hyperfine: Option<f64>,
    pub spin: f64,
    /// Whether the species is summed over by the bath-size estimator.
    pub in_estimator: bool,
}

/// Species table at a given magnetic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesRegistry {
    pub field: f64,
    pub species: Vec<NuclearSpecies>,
    /// Reported ⁷¹Ga − ⁷⁵As difference frequency, MHz (scaled with field).
    pub difference_frequency: f64,
}

impl SpeciesRegistry {
    pub fn get(&self, name: &str) -> Option<&NuclearSpecies> {
        self.species.iter().find(|s| s.name == name)
    }

    /// ⁷¹Ga − ⁷⁵As Larmor difference computed from the table.
    pub fn computed_difference(&self) -> Option<f64> {
        Some(self.get("71Ga")?.larmor - self.get("75As")?.larmor)
    }

    /// Rebuilds the table for another field with fixed gyromagnetic ratios.
    pub fn at_field(&self, field: f64) -> Result<Self> {
        if !(field > 0.0) {
            return Err(Error::invalid("field", "must be > 0"));
        }
        let scale = field / self.field;
        Ok(Self {
            field,
            species: self
                .species
                .iter()
                .map(|s| NuclearSpecies {
                    larmor: s.larmor * scale,
                    ..s.clone()
                })
                .collect(),
            difference_frequency: self.difference_frequency * scale,
        })
    }
}

fn species(name: &str, larmor: f64, abundance: f64, hyperfine: Option<f64>, in_estimator: bool) -> NuclearSpecies {
    NuclearSpecies {
        name: name.to_string(),
        larmor,
        abundance,
        hyperfine,
        spin: c::NUCLEAR_SPIN,
        in_estimator,
    }
}

/// GaAs species table at 3.00 T.
pub fn default_gaas_registry() -> SpeciesRegistry {
    SpeciesRegistry {
        field: c::REFERENCE_FIELD_T,
        species: vec![
            species("75As", c::LARMOR_AS75_MHZ, c::ABUNDANCE_AS75, Some(c::HYPERFINE_AS75_MHZ), true),
            species("69Ga", c::LARMOR_GA69_MHZ, c::ABUNDANCE_GA69, Some(c::HYPERFINE_GA69_MHZ), true),
            // Larmor line only; no hyperfine constant is used for aluminium.
            species("27Al", c::LARMOR_AL27_MHZ, c::ABUNDANCE_AL27, None, false),
            species("71Ga", c::LARMOR_GA71_MHZ, c::ABUNDANCE_GA71, Some(c::HYPERFINE_GA71_MHZ), true),
        ],
        difference_frequency: c::DIFFERENCE_FREQUENCY_MHZ,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_contains_larmor_lines() {
        let reg = default_gaas_registry();
        assert_eq!(reg.get("75As").unwrap().larmor, 21.9);
        assert_eq!(reg.get("69Ga").unwrap().larmor, 30.7);
        assert_eq!(reg.get("27Al").unwrap().larmor, 33.28);
        assert_eq!(reg.get("71Ga").unwrap().larmor, 39.0);
        assert_eq!(reg.difference_frequency, 17.08);
    }

    #[test]
    fn difference_frequency_matches_table() {
        let reg = default_gaas_registry();
        let d = reg.computed_difference().unwrap();
        assert!((d - 17.1).abs() < 1e-9);
        assert!((d - reg.difference_frequency).abs() < 0.2);
    }

    #[test]
    fn larmor_scales_with_field() {
        let reg = default_gaas_registry();
        let half = reg.at_field(1.5).unwrap();
        for (a, b) in reg.species.iter().zip(&half.species) {
            assert!((b.larmor - a.larmor / 2.0).abs() < 1e-12);
        }
        assert!(reg.at_field(0.0).is_err());
    }

    #[test]
    fn aluminium_excluded_from_estimator() {
        let reg = default_gaas_registry();
        let used: Vec<_> = reg.species.iter().filter(|s| s.in_estimator).map(|s| s.name.as_str()).collect();
        assert_eq!(used, ["75As", "69Ga", "71Ga"]);
    }

    #[test]
    fn qubit_validation() {
        let mut q = QubitParams::default();
        assert!(q.validate().is_ok());
        q.osp_fidelity = 1.2;
        assert!(q.validate().is_err());
        let q = QubitParams { t1: 0.0, ..Default::default() };
        assert!(q.validate().is_err());
    }

    #[test]
    fn thermal_polarization_is_small_at_4k() {
        let z = QubitParams::default().thermal_z();
        assert!(z > 0.02 && z < 0.03, "{z}");
    }
}
