//! Physical constants and their sources.
//!
//! Frequencies are ordinary frequencies in MHz. Larmor frequencies are the
//! values measured at the reference field of 3.00 T on the GaAs dot; the
//! hyperfine constants are the standard GaAs literature values (Paget et al.,
//! Phys. Rev. B 15, 5780 (1977), as tabulated in Urbaszek et al., Rev. Mod.
//! Phys. 85, 79 (2013)), converted with 1 µeV = 241.799 MHz.

/// Reference field for the Larmor table, T.
pub const REFERENCE_FIELD_T: f64 = 3.00;

/// Electron Zeeman frequency at the reference field, MHz.
pub const ELECTRON_ZEEMAN_MHZ: f64 = 4540.0;

/// Electron g-factor (sign assumed negative).
pub const ELECTRON_G_FACTOR: f64 = -0.11;

/// Pump-probe electron spin lifetime, µs.
pub const ELECTRON_T1_US: f64 = 47.0;

/// Optical spin-pumping time, ns.
pub const OSP_TIME_NS: f64 = 17.0;

/// Optical spin-pumping fidelity.
pub const OSP_FIDELITY: f64 = 0.99;

/// Drive-induced spin-flip rate per unit Rabi frequency: 2.5 MHz / 130 MHz.
pub const KAPPA_RATIO: f64 = 0.019;

/// Bath temperature, K.
pub const TEMPERATURE_K: f64 = 4.2;

/// Nuclear Larmor frequencies at 3.00 T, MHz.
pub const LARMOR_AS75_MHZ: f64 = 21.9;
pub const LARMOR_GA69_MHZ: f64 = 30.7;
pub const LARMOR_AL27_MHZ: f64 = 33.28;
pub const LARMOR_GA71_MHZ: f64 = 39.0;

/// Reported ⁷¹Ga − ⁷⁵As difference frequency, MHz.
pub const DIFFERENCE_FREQUENCY_MHZ: f64 = 17.08;

/// Natural abundances within the host sublattice.
pub const ABUNDANCE_AS75: f64 = 1.0;
pub const ABUNDANCE_GA69: f64 = 0.601;
pub const ABUNDANCE_GA71: f64 = 0.399;
/// The dot is pure GaAs; aluminium lives only in the barrier.
pub const ABUNDANCE_AL27: f64 = 0.0;

/// Total hyperfine constants A_k, MHz (43.5, 36.9 and 46.9 µeV).
pub const HYPERFINE_AS75_MHZ: f64 = 43.5 * UEV_TO_MHZ;
pub const HYPERFINE_GA69_MHZ: f64 = 36.9 * UEV_TO_MHZ;
pub const HYPERFINE_GA71_MHZ: f64 = 46.9 * UEV_TO_MHZ;

pub const UEV_TO_MHZ: f64 = 241.798_924;

/// Nuclear spin of every GaAs/AlAs isotope.
pub const NUCLEAR_SPIN: f64 = 1.5;

/// Thermal-equilibrium Overhauser spread of the uncooled dot, MHz.
pub const SIGMA_WARM_MHZ: f64 = 52.0;

/// Hyperfine coupling quantum per nucleus, MHz.
pub const COUPLING_QUANTUM_MHZ: f64 = 0.13;

/// Re-warming time of a cooled bath, µs (41 ± 4 µs after sensing-based
/// cooling, 39 ± 8 µs after Rabi cooling).
pub const REWARM_TIME_US: f64 = 41.0;

/// Planck and Boltzmann constants (SI).
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;
pub const BOLTZMANN_J_K: f64 = 1.380_649e-23;
