//! Declarative experiment configuration (TOML).

use serde::{Deserialize, Serialize};

use crate::analysis::{AbundanceConvention, FitModel};
use crate::bath::BathModel;
use crate::centralspin::CentralSpinSystem;
use crate::cooling::{EnsembleSettings, Protocol, QscConfig, RabiCoolingConfig};
use crate::error::{Error, Result};
use crate::model::QubitParams;
use crate::sequences::{linspace, CpmgConvention, MeasurementModel, RunSettings};

/// Names accepted by the `experiment` key.
pub const EXPERIMENTS: [&str; 10] = [
    "rabi",
    "ramsey",
    "detuned_ramsey",
    "cpmg",
    "t1",
    "phase_sweep",
    "rabi_cooling",
    "qsc",
    "hh_scan",
    "chevron",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Rabi,
    Ramsey,
    DetunedRamsey,
    Cpmg,
    T1,
    PhaseSweep,
    RabiCooling,
    Qsc,
    HhScan,
    Chevron,
}

impl Experiment {
    pub fn parse(name: &str) -> Result<Self> {
        let all = [
            Experiment::Rabi,
            Experiment::Ramsey,
            Experiment::DetunedRamsey,
            Experiment::Cpmg,
            Experiment::T1,
            Experiment::PhaseSweep,
            Experiment::RabiCooling,
            Experiment::Qsc,
            Experiment::HhScan,
            Experiment::Chevron,
        ];
        EXPERIMENTS
            .iter()
            .position(|&n| n == name)
            .map(|i| all[i])
            .ok_or_else(|| Error::UnknownExperiment {
                name: name.to_string(),
                valid: EXPERIMENTS.to_vec(),
            })
    }

    pub fn name(self) -> &'static str {
        EXPERIMENTS[self as usize]
    }
}

/// A sweep axis: either `{ start, stop, points }` or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range { start: f64, stop: f64, points: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn range(start: f64, stop: f64, points: usize) -> Self {
        Grid::Range { start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Range { start, stop, points } => linspace(*start, *stop, *points),
            Grid::Values(v) => v.clone(),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let v = self.values();
        if v.is_empty() {
            return Err(Error::invalid(field, "grid must not be empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid(field, "grid values must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingKind {
    RabiCooling,
    Qsc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiSection {
    pub omega: f64,
    pub detuning: f64,
    pub ac_stark: f64,
    /// Drive times, ns.
    pub t: Grid,
    pub fit: Option<FitModel>,
}

impl Default for RabiSection {
    fn default() -> Self {
        Self {
            omega: 130.0,
            detuning: 0.0,
            ac_stark: 0.0,
            t: Grid::range(0.0, 300.0, 601),
            fit: Some(FitModel::ExpCosine),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseySection {
    /// Free-evolution times, ns.
    pub tau: Grid,
    /// Serrodyne frequency, MHz.
    pub serrodyne: f64,
    pub fit: Option<FitModel>,
    /// Also report σ_OH from the spectral width.
    pub fft: bool,
    /// Prepare the bath with a cooling protocol first.
    pub cooled_by: Option<CoolingKind>,
}

impl Default for RamseySection {
    fn default() -> Self {
        Self {
            tau: Grid::range(0.0, 400.0, 201),
            serrodyne: 0.0,
            fit: Some(FitModel::Gaussian),
            fft: false,
            cooled_by: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetunedRamseySection {
    /// Δ = f_c − f_probe, MHz.
    pub offsets: Grid,
    pub tau: Grid,
    /// Offset whose line cut is fitted.
    pub fit_offset: Option<f64>,
    pub fit: FitModel,
    pub cooled_by: Option<CoolingKind>,
}

impl Default for DetunedRamseySection {
    fn default() -> Self {
        Self {
            offsets: Grid::range(-100.0, 100.0, 41),
            tau: Grid::range(0.0, 250.0, 251),
            fit_offset: Some(50.0),
            fit: FitModel::GaussCosine,
            cooled_by: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpmgSection {
    pub n_pi: Vec<usize>,
    /// Points per decay curve.
    pub points: usize,
    /// Longest total time per entry of `n_pi`, ns; by default three times
    /// the expected T2.
    pub t_max: Option<Vec<f64>>,
    pub convention: CpmgConvention,
    pub fit: FitModel,
}

impl Default for CpmgSection {
    fn default() -> Self {
        Self {
            n_pi: vec![1, 2, 4, 8, 16, 20],
            points: 31,
            t_max: None,
            convention: CpmgConvention::NTau,
            fit: FitModel::Stretched,
        }
    }
}

impl CpmgSection {
    pub fn t_max_for(&self, index: usize) -> f64 {
        match &self.t_max {
            Some(v) => v[index],
            None => 3.0 * 2930.0 * (self.n_pi[index] as f64).powf(0.7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T1Section {
    /// Pump-probe delays, ns.
    pub tau: Grid,
    pub fit: Option<FitModel>,
}

impl Default for T1Section {
    fn default() -> Self {
        Self {
            tau: Grid::range(0.0, 200_000.0, 41),
            fit: Some(FitModel::Recovery),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSection {
    /// Phase of the second pulse, rad.
    pub phi: Grid,
}

impl Default for PhaseSection {
    fn default() -> Self {
        Self {
            phi: Grid::range(0.0, 4.0 * std::f64::consts::PI, 97),
        }
    }
}

/// Ramsey probe run on the cooled bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub enabled: bool,
    pub tau: Grid,
    pub serrodyne: f64,
    pub fit: Option<FitModel>,
    pub fft: bool,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            enabled: true,
            tau: Grid::range(0.0, 2000.0, 201),
            serrodyne: 0.0,
            fit: Some(FitModel::Gaussian),
            fft: true,
        }
    }
}

/// Scan of one cooling parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevronSection {
    pub omega: f64,
    pub ac_stark: f64,
    /// Probe detunings Δ, MHz.
    pub detuning: Grid,
    /// Drive times, ns.
    pub t: Grid,
    /// Lock the bath to each probe frequency with Rabi-cooling pulses first.
    pub lock: bool,
    pub lock_cycles: usize,
    /// Also evaluate the Gaussian-averaged lineshape.
    pub model: bool,
}

impl Default for ChevronSection {
    fn default() -> Self {
        Self {
            omega: 8.9,
            ac_stark: -1.61,
            detuning: Grid::range(-30.0, 30.0, 61),
            t: Grid::range(0.0, 400.0, 101),
            lock: false,
            lock_cycles: 20,
            model: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HhScanSection {
    /// Drive Rabi frequencies, MHz.
    pub omega: Grid,
    /// Drive duration, ns.
    pub t_drive: f64,
}

impl Default for HhScanSection {
    fn default() -> Self {
        Self {
            omega: Grid::range(15.0, 45.0, 301),
            t_drive: 2000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub convention: AbundanceConvention,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            convention: AbundanceConvention::PerSublattice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub shots: usize,
    /// Output directory used when none is given on the command line.
    pub output: Option<String>,
    /// Rabi frequency of the π/2 and π pulses, MHz.
    pub pulse_rabi: f64,
    pub ideal_rotations: bool,
    pub qubit: QubitParams,
    pub bath: BathModel,
    /// Defaults to perfect contrast with the qubit's spin-pumping fidelity.
    pub measurement: Option<MeasurementModel>,
    pub rabi: RabiSection,
    pub ramsey: RamseySection,
    pub detuned_ramsey: DetunedRamseySection,
    pub cpmg: CpmgSection,
    pub t1: T1Section,
    pub phase_sweep: PhaseSection,
    pub rabi_cooling: RabiCoolingConfig,
    pub qsc: QscConfig,
    pub ensemble: EnsembleSettings,
    /// Independent ensemble repetitions of a cooling run.
    pub reps: usize,
    pub probe: ProbeSection,
    pub sweep: Option<SweepSection>,
    pub chevron: ChevronSection,
    pub hh_scan: HhScanSection,
    pub centralspin: CentralSpinSystem,
    pub estimator: EstimatorSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let settings = RunSettings::default();
        Self {
            experiment: Experiment::Ramsey,
            seed: settings.seed,
            shots: settings.shots,
            output: None,
            pulse_rabi: settings.pulse_rabi,
            ideal_rotations: settings.ideal_rotations,
            qubit: QubitParams::default(),
            bath: BathModel::default(),
            measurement: None,
            rabi: RabiSection::default(),
            ramsey: RamseySection::default(),
            detuned_ramsey: DetunedRamseySection::default(),
            cpmg: CpmgSection::default(),
            t1: T1Section::default(),
            phase_sweep: PhaseSection::default(),
            rabi_cooling: RabiCoolingConfig::default(),
            qsc: QscConfig::default(),
            ensemble: EnsembleSettings::default(),
            reps: 1,
            probe: ProbeSection::default(),
            sweep: None,
            chevron: ChevronSection::default(),
            hh_scan: HhScanSection::default(),
            centralspin: CentralSpinSystem::default(),
            estimator: EstimatorSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        match table.get("experiment") {
            None => return Err(Error::invalid("experiment", "missing")),
            Some(toml::Value::String(name)) => {
                Experiment::parse(name)?;
            }
            Some(_) => return Err(Error::invalid("experiment", "must be a string")),
        }
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            shots: self.shots,
            seed: self.seed,
            ideal_rotations: self.ideal_rotations,
            pulse_rabi: self.pulse_rabi,
            measurement: self.measurement.unwrap_or_else(|| MeasurementModel::from_qubit(&self.qubit)),
        }
    }

    pub fn protocol(&self, kind: CoolingKind) -> Protocol {
        match kind {
            CoolingKind::RabiCooling => Protocol::Rabi(self.rabi_cooling.clone()),
            CoolingKind::Qsc => Protocol::Qsc(self.qsc.clone()),
        }
    }

    /// Checks the shared blocks and the section of the selected experiment.
    pub fn validate(&self) -> Result<()> {
        self.qubit.validate()?;
        self.bath.validate()?;
        self.settings().validate()?;
        match self.experiment {
            Experiment::Rabi => {
                self.rabi.t.validate("rabi.t")?;
                if !(self.rabi.omega >= 0.0) {
                    return Err(Error::invalid("rabi.omega", "must be >= 0"));
                }
            }
            Experiment::Ramsey => {
                self.ramsey.tau.validate("ramsey.tau")?;
                if let Some(kind) = self.ramsey.cooled_by {
                    self.validate_cooling(kind)?;
                }
            }
            Experiment::DetunedRamsey => {
                self.detuned_ramsey.tau.validate("detuned_ramsey.tau")?;
                self.detuned_ramsey.offsets.validate("detuned_ramsey.offsets")?;
                if let Some(kind) = self.detuned_ramsey.cooled_by {
                    self.validate_cooling(kind)?;
                }
            }
            Experiment::Cpmg => {
                let c = &self.cpmg;
                if c.n_pi.is_empty() {
                    return Err(Error::invalid("cpmg.n_pi", "must not be empty"));
                }
                if c.n_pi.contains(&0) {
                    return Err(Error::invalid("cpmg.n_pi", "must be >= 1"));
                }
                if c.points < 2 {
                    return Err(Error::invalid("cpmg.points", "must be >= 2"));
                }
                if let Some(t) = &c.t_max {
                    if t.len() != c.n_pi.len() {
                        return Err(Error::invalid("cpmg.t_max", "needs one entry per n_pi"));
                    }
                    if t.iter().any(|&v| !(v > 0.0)) {
                        return Err(Error::invalid("cpmg.t_max", "must be > 0"));
                    }
                }
            }
            Experiment::T1 => self.t1.tau.validate("t1.tau")?,
            Experiment::PhaseSweep => self.phase_sweep.phi.validate("phase_sweep.phi")?,
            Experiment::RabiCooling => self.validate_cooling(CoolingKind::RabiCooling)?,
            Experiment::Qsc => self.validate_cooling(CoolingKind::Qsc)?,
            Experiment::HhScan => {
                self.centralspin.validate()?;
                self.hh_scan.omega.validate("hh_scan.omega")?;
                if !(self.hh_scan.t_drive >= 0.0) {
                    return Err(Error::invalid("hh_scan.t_drive", "must be >= 0"));
                }
            }
            Experiment::Chevron => {
                self.chevron.detuning.validate("chevron.detuning")?;
                self.chevron.t.validate("chevron.t")?;
                if self.chevron.lock {
                    self.rabi_cooling.validate()?;
                }
            }
        }
        Ok(())
    }

    fn validate_cooling(&self, kind: CoolingKind) -> Result<()> {
        self.protocol(kind).validate()?;
        self.ensemble.validate()?;
        if self.reps == 0 {
            return Err(Error::invalid("reps", "must be >= 1"));
        }
        if self.probe.enabled {
            self.probe.tau.validate("probe.tau")?;
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::invalid("sweep.values", "must not be empty"));
            }
            for &v in &s.values {
                apply_sweep(&self.protocol(kind), &s.parameter, v)?.validate()?;
            }
        }
        Ok(())
    }
}

/// Copy of `protocol` with one parameter replaced.
pub fn apply_sweep(protocol: &Protocol, parameter: &str, value: f64) -> Result<Protocol> {
    let unknown = || Error::invalid("sweep.parameter", format!("`{parameter}` cannot be swept for this protocol"));
    Ok(match protocol {
        Protocol::Rabi(c) => {
            let mut c = c.clone();
            match parameter {
                "omega_c" => c.omega_c = value,
                "t_c" => c.t_c = value,
                "gain" => c.gain = value,
                "diffusion" => c.diffusion = value,
                "capture_width" => c.capture_width = value,
                _ => return Err(unknown()),
            }
            Protocol::Rabi(c)
        }
        Protocol::Qsc(c) => {
            let mut c = c.clone();
            match parameter {
                "omega_c" => c.omega_c = value,
                "t_c" => c.t_c = value,
                "tau_min" => c.tau_min = value,
                "tau_max" => c.tau_max = value,
                "gain" => c.gain = value,
                "diffusion" => c.diffusion = value,
                "n_cycles" => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(Error::invalid("sweep.values", "n_cycles must be a positive integer"));
                    }
                    c.n_cycles = value as usize;
                }
                _ => return Err(unknown()),
            }
            Protocol::Qsc(c)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_experiment_lists_choices() {
        let err = ExperimentConfig::from_toml_str("experiment = \"unknown\"").unwrap_err();
        let msg = err.to_string();
        for name in EXPERIMENTS {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn invalid_parameter_names_field() {
        let err = ExperimentConfig::from_toml_str("experiment = \"rabi\"\n[qubit]\nosp_fidelity = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("qubit.osp_fidelity"));
        let err = ExperimentConfig::from_toml_str("experiment = \"cpmg\"\n[cpmg]\nn_pi = [0]\n").unwrap_err();
        assert!(err.to_string().contains("cpmg.n_pi"));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml_str("experiment = \"rabi\"\n[rabi]\nomgea = 3.0\n").is_err());
    }

    #[test]
    fn grids_accept_ranges_and_lists() {
        let cfg = ExperimentConfig::from_toml_str(
            "experiment = \"ramsey\"\n[ramsey]\ntau = { start = 0.0, stop = 10.0, points = 11 }\n",
        )
        .unwrap();
        assert_eq!(cfg.ramsey.tau.values().len(), 11);
        let cfg = ExperimentConfig::from_toml_str("experiment = \"t1\"\n[t1]\ntau = [0.0, 5.0, 9.0]\n").unwrap();
        assert_eq!(cfg.t1.tau.values(), vec![0.0, 5.0, 9.0]);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig {
            experiment: Experiment::Qsc,
            sweep: Some(SweepSection {
                parameter: "tau_max".into(),
                values: vec![100.0, 400.0],
            }),
            ..Default::default()
        };
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn experiment_names_match_enum_order() {
        for name in EXPERIMENTS {
            assert_eq!(Experiment::parse(name).unwrap().name(), name);
        }
    }
}
